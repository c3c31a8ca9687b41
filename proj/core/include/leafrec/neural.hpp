#ifndef LEAFREC_NEURAL_HPP
#define LEAFREC_NEURAL_HPP

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "leafrec/tensor.hpp"

namespace leafrec {

struct DivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One trainable array together with its gradient accumulator.
struct ParamRef {
    std::vector<double>* value = nullptr;
    std::vector<double>* grad = nullptr;
    bool weight_decay = false;  // L2 applies to weights, not biases/BN
};

class Layer {
public:
    virtual ~Layer() = default;
    virtual Tensor forward(const Tensor& x, bool train) = 0;
    virtual Tensor backward(const Tensor& grad_out) = 0;
    virtual std::vector<ParamRef> params() { return {}; }
    virtual std::string name() const = 0;
    /// Extra non-trainable state that must survive serialization
    /// (batch-norm running statistics).
    virtual std::vector<std::vector<double>*> state() { return {}; }
};

// Valid cross-correlation, stride 1. When the input is smaller than the
// kernel along a dimension, the kernel's leading block of the input's
// size is used and that dimension collapses to 1.
class Conv2d : public Layer {
public:
    Conv2d(int in_ch, int out_ch, int ksize);
    Tensor forward(const Tensor& x, bool train) override;
    Tensor backward(const Tensor& gy) override;
    std::vector<ParamRef> params() override;
    std::string name() const override { return "conv2d"; }

    int in_ch, out_ch, ksize;
    std::vector<double> w;  // [out_ch, in_ch, k, k]
    std::vector<double> b;  // [out_ch]
    std::vector<double> gw, gb;

private:
    Tensor x_;
};

class Conv1d : public Layer {
public:
    Conv1d(int in_ch, int out_ch, int ksize);
    Tensor forward(const Tensor& x, bool train) override;
    Tensor backward(const Tensor& gy) override;
    std::vector<ParamRef> params() override;
    std::string name() const override { return "conv1d"; }

    int in_ch, out_ch, ksize;
    std::vector<double> w;  // [out_ch, in_ch, k]
    std::vector<double> b;
    std::vector<double> gw, gb;

private:
    Tensor x_;
};

class Relu : public Layer {
public:
    Tensor forward(const Tensor& x, bool train) override;
    Tensor backward(const Tensor& gy) override;
    std::string name() const override { return "relu"; }

private:
    std::vector<std::uint8_t> pass_;
    std::vector<int> shape_;
};

/// Batch normalization over all axes except axis 1 (channels/features).
class BatchNorm : public Layer {
public:
    explicit BatchNorm(int channels, double momentum = 0.1, double eps = 1e-5);
    Tensor forward(const Tensor& x, bool train) override;
    Tensor backward(const Tensor& gy) override;
    std::vector<ParamRef> params() override;
    std::vector<std::vector<double>*> state() override;
    std::string name() const override { return "batchnorm"; }

    int channels;
    double momentum, eps;
    std::vector<double> gamma, beta, ggamma, gbeta;
    std::vector<double> running_mean, running_var;

private:
    Tensor x_;
    std::vector<double> mean_, var_;
};

/// 2x2 max-pool, stride 2, floor semantics; a dimension of size 1
/// passes through unchanged.
class MaxPool2d : public Layer {
public:
    Tensor forward(const Tensor& x, bool train) override;
    Tensor backward(const Tensor& gy) override;
    std::string name() const override { return "maxpool2d"; }

private:
    std::vector<std::size_t> argmax_;
    std::vector<int> in_shape_;
};

class MaxPool1d : public Layer {
public:
    Tensor forward(const Tensor& x, bool train) override;
    Tensor backward(const Tensor& gy) override;
    std::string name() const override { return "maxpool1d"; }

private:
    std::vector<std::size_t> argmax_;
    std::vector<int> in_shape_;
};

class Flatten : public Layer {
public:
    Tensor forward(const Tensor& x, bool train) override;
    Tensor backward(const Tensor& gy) override;
    std::string name() const override { return "flatten"; }

private:
    std::vector<int> in_shape_;
};

class Dense : public Layer {
public:
    Dense(int in_features, int out_features);
    Tensor forward(const Tensor& x, bool train) override;
    Tensor backward(const Tensor& gy) override;
    std::vector<ParamRef> params() override;
    std::string name() const override { return "dense"; }

    int in_features, out_features;
    std::vector<double> w;  // [out, in]
    std::vector<double> b;
    std::vector<double> gw, gb;

private:
    Tensor x_;
};

/// Inverted dropout; identity in inference mode.
class Dropout : public Layer {
public:
    Dropout(double rate, std::uint64_t seed);
    Tensor forward(const Tensor& x, bool train) override;
    Tensor backward(const Tensor& gy) override;
    std::string name() const override { return "dropout"; }

    double rate;

private:
    std::mt19937_64 rng_;
    std::vector<double> scale_;
    std::vector<int> shape_;
};

// --- loss ---

/// Softmax probabilities per row; rows sum to 1.
Tensor softmax(const Tensor& logits);

/// Mean cross-entropy over the batch; grad is (probs - onehot)/batch.
struct LossResult {
    double loss;
    Tensor grad;
    int correct;
};
LossResult softmax_cross_entropy(const Tensor& logits, const std::vector<int>& labels);

// --- encoder assembly ---

enum class EncoderKind { Conv2d, Conv1d, Dense };

struct EncoderArch {
    EncoderKind kind = EncoderKind::Dense;
    int in_channels = 1;   // conv2d: image channels; conv1d: 1
    int in_extent = 0;     // conv2d: side; conv1d: length; dense: feature count
    int embedding = 100;
    double dropout = 0.3;

    std::vector<int> input_shape() const;  // without the batch dim
};

/// Encoder stack plus the softmax training head (kept separate so that
/// encode() stops at the embedding).
class EncoderModel {
public:
    EncoderModel() = default;
    EncoderModel(const EncoderArch& arch, int num_classes, std::uint64_t seed);
    EncoderModel(const EncoderModel&) = delete;
    EncoderModel& operator=(const EncoderModel&) = delete;
    EncoderModel(EncoderModel&&) = default;
    EncoderModel& operator=(EncoderModel&&) = default;

    Tensor embed(const Tensor& x, bool train);
    Tensor logits(const Tensor& x, bool train);
    /// Backpropagate the loss gradient through head and encoder.
    void backward(const Tensor& loss_grad);

    std::vector<ParamRef> params();
    std::vector<std::vector<double>*> state();
    void zero_grads();

    /// Flat snapshot of every parameter and state array, for model
    /// selection and serialization.
    std::vector<double> snapshot() const;
    void restore(const std::vector<double>& snap);

    const EncoderArch& arch() const { return arch_; }
    int num_classes() const { return num_classes_; }

    std::vector<std::unique_ptr<Layer>> encoder;
    std::unique_ptr<Dense> head;

private:
    EncoderArch arch_;
    int num_classes_ = 0;
};

struct TrainConfig {
    int epochs = 30;
    int batch = 32;
    double lr = 0.01;
    double momentum = 0.9;
    double l2 = 1e-4;
    double dropout = 0.3;
    std::uint64_t seed = 1;
};

struct EpochStats {
    double train_loss = 0, train_acc = 0;
    double valid_loss = 0, valid_acc = 0;
};

struct TrainResult {
    EncoderModel model;
    std::vector<EpochStats> history;
    int best_epoch = -1;
    double best_valid_acc = 0;
};

/// Mini-batch SGD with momentum; model selected at best validation
/// accuracy. Throws DivergenceError on non-finite loss.
TrainResult train_encoder(const Tensor& train_x, const std::vector<int>& train_y,
                          const Tensor& valid_x, const std::vector<int>& valid_y,
                          const EncoderArch& arch, int num_classes,
                          const TrainConfig& cfg);

/// Deterministic inference embedding (batch or single input).
Tensor encode(EncoderModel& model, const Tensor& x);

/// Class predictions of the softmax head in inference mode.
std::vector<int> head_predict(EncoderModel& model, const Tensor& x);

// --- serialization (bit-stable round trip) ---

void save_encoder(const EncoderModel& model, const std::string& path);
EncoderModel load_encoder(const std::string& path);

}  // namespace leafrec

#endif
