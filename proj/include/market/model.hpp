#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace market {

struct ModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One labeled training sample. Labels are small non-negative class ids.
struct Sample {
    Eigen::VectorXd features;
    int label = 0;
};

// Perceptron with {0,1} labels mapped to {-1,+1} internally. A sample with
// margin <= 0 triggers w += eta*y*x, b += eta*y; otherwise update is the
// identity. Zero activation predicts class 0.
struct PerceptronModel {
    Eigen::VectorXd weights;
    double bias = 0.0;
    double learning_rate = 1.0;
};

// Binary logistic regression, one SGD step on log-loss per sample:
// w -= eta*(p - y)*x, b -= eta*(p - y). Probability exactly 0.5 predicts
// class 1.
struct LogisticModel {
    Eigen::VectorXd weights;
    double bias = 0.0;
    double learning_rate = 0.1;
};

using OnlineModel = std::variant<PerceptronModel, LogisticModel>;

int feature_dim(const OnlineModel& model);
std::string model_kind(const OnlineModel& model);

// Zero-weight model of the given kind ("perceptron" | "logistic").
OnlineModel make_model(const std::string& kind, int dim, double learning_rate);

int predict(const OnlineModel& model, const Eigen::VectorXd& features);

// One online training step; models are values, the updated state is returned.
OnlineModel update(const OnlineModel& model, const Sample& sample);

// Fold the model over the samples in order. Equals sequential update.
OnlineModel fold(OnlineModel model, std::span<const Sample> samples);

// Fraction of samples predicted correctly. Throws on an empty dataset.
double evaluate(const OnlineModel& model, std::span<const Sample> dataset);

// Canonical text encoding: "kind\neta\nb\nw1,w2,...,wd\n" with
// shortest-round-trip decimal numerals. Deterministic; round-trips
// bit-exactly.
std::string serialize_model(const OnlineModel& model);
OnlineModel deserialize_model(const std::string& bytes);

// Dataset encoding shared with the contract: one line per sample,
// "label,f1,f2,...,fd\n".
std::string encode_dataset(std::span<const Sample> samples);
std::vector<Sample> decode_dataset(const std::string& text);

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);
double parse_double(const std::string& text);

} // namespace market
