#include "market/model.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace market {
namespace {

void check_dim(const OnlineModel& model, const Eigen::VectorXd& x)
{
    if (x.size() != feature_dim(model)) {
        throw ModelError("feature dimension mismatch: expected " +
                         std::to_string(feature_dim(model)) + ", got " +
                         std::to_string(x.size()));
    }
    if (!x.allFinite()) {
        throw ModelError("non-finite feature value");
    }
}

double sigmoid(double z)
{
    return 1.0 / (1.0 + std::exp(-z));
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = s.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

} // namespace

std::string format_double(double value)
{
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc()) {
        throw ModelError("cannot format double");
    }
    return std::string(buf, ptr);
}

double parse_double(const std::string& text)
{
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw ModelError("malformed numeral: '" + text + "'");
    }
    return value;
}

int feature_dim(const OnlineModel& model)
{
    return std::visit([](const auto& m) { return int(m.weights.size()); }, model);
}

std::string model_kind(const OnlineModel& model)
{
    return std::holds_alternative<PerceptronModel>(model) ? "perceptron" : "logistic";
}

OnlineModel make_model(const std::string& kind, int dim, double learning_rate)
{
    if (dim <= 0) {
        throw ModelError("feature dimension must be positive");
    }
    if (!(learning_rate > 0.0)) {
        throw ModelError("learning rate must be positive");
    }
    if (kind == "perceptron") {
        return PerceptronModel{Eigen::VectorXd::Zero(dim), 0.0, learning_rate};
    }
    if (kind == "logistic") {
        return LogisticModel{Eigen::VectorXd::Zero(dim), 0.0, learning_rate};
    }
    throw ModelError("unknown model kind: '" + kind + "'");
}

int predict(const OnlineModel& model, const Eigen::VectorXd& features)
{
    check_dim(model, features);
    if (const auto* p = std::get_if<PerceptronModel>(&model)) {
        return p->weights.dot(features) + p->bias > 0.0 ? 1 : 0;
    }
    const auto& l = std::get<LogisticModel>(model);
    return sigmoid(l.weights.dot(features) + l.bias) >= 0.5 ? 1 : 0;
}

OnlineModel update(const OnlineModel& model, const Sample& sample)
{
    check_dim(model, sample.features);
    if (const auto* p = std::get_if<PerceptronModel>(&model)) {
        double y = sample.label == 0 ? -1.0 : 1.0;
        double margin = y * (p->weights.dot(sample.features) + p->bias);
        if (margin > 0.0) {
            return model;
        }
        PerceptronModel next = *p;
        next.weights += next.learning_rate * y * sample.features;
        next.bias += next.learning_rate * y;
        return next;
    }
    const auto& l = std::get<LogisticModel>(model);
    double p_hat = sigmoid(l.weights.dot(sample.features) + l.bias);
    double grad = p_hat - double(sample.label);
    LogisticModel next = l;
    next.weights -= next.learning_rate * grad * sample.features;
    next.bias -= next.learning_rate * grad;
    return next;
}

OnlineModel fold(OnlineModel model, std::span<const Sample> samples)
{
    for (const Sample& s : samples) {
        model = update(model, s);
    }
    return model;
}

double evaluate(const OnlineModel& model, std::span<const Sample> dataset)
{
    if (dataset.empty()) {
        throw ModelError("cannot evaluate on an empty dataset");
    }
    std::size_t correct = 0;
    for (const Sample& s : dataset) {
        if (predict(model, s.features) == s.label) {
            ++correct;
        }
    }
    return double(correct) / double(dataset.size());
}

std::string serialize_model(const OnlineModel& model)
{
    std::string out = model_kind(model) + "\n";
    std::visit(
        [&](const auto& m) {
            out += format_double(m.learning_rate) + "\n";
            out += format_double(m.bias) + "\n";
            for (Eigen::Index i = 0; i < m.weights.size(); ++i) {
                if (i > 0) {
                    out += ',';
                }
                out += format_double(m.weights[i]);
            }
            out += '\n';
        },
        model);
    return out;
}

OnlineModel deserialize_model(const std::string& bytes)
{
    std::vector<std::string> lines = split(bytes, '\n');
    if (lines.size() != 5 || !lines[4].empty()) {
        throw ModelError("malformed model encoding");
    }
    const std::string& kind = lines[0];
    if (kind != "perceptron" && kind != "logistic") {
        throw ModelError("unknown model kind: '" + kind + "'");
    }
    double eta = parse_double(lines[1]);
    double bias = parse_double(lines[2]);
    std::vector<std::string> parts = split(lines[3], ',');
    Eigen::VectorXd w(parts.size());
    for (std::size_t i = 0; i < parts.size(); ++i) {
        w[Eigen::Index(i)] = parse_double(parts[i]);
    }
    if (kind == "perceptron") {
        return PerceptronModel{std::move(w), bias, eta};
    }
    return LogisticModel{std::move(w), bias, eta};
}

std::string encode_dataset(std::span<const Sample> samples)
{
    std::string out;
    for (const Sample& s : samples) {
        out += std::to_string(s.label);
        for (Eigen::Index i = 0; i < s.features.size(); ++i) {
            out += ',';
            out += format_double(s.features[i]);
        }
        out += '\n';
    }
    return out;
}

std::vector<Sample> decode_dataset(const std::string& text)
{
    std::vector<Sample> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> parts = split(line, ',');
        if (parts.size() < 2) {
            throw ModelError("malformed dataset line: '" + line + "'");
        }
        Sample s;
        s.label = int(parse_double(parts[0]));
        s.features.resize(Eigen::Index(parts.size() - 1));
        for (std::size_t i = 1; i < parts.size(); ++i) {
            s.features[Eigen::Index(i - 1)] = parse_double(parts[i]);
        }
        out.push_back(std::move(s));
    }
    return out;
}

} // namespace market
