#pragma once

#include <cstring>
#include <fstream>
#include <memory>

#include <nlohmann/json.hpp>

#include "vts/nn/layers.hpp"

namespace vts::nn {

enum class Arch { DilatedResnet, ResnetBaseline, AlexnetBaseline };

inline std::string to_string(Arch a) {
    switch (a) {
        case Arch::DilatedResnet: return "dilated_resnet";
        case Arch::ResnetBaseline: return "resnet_baseline";
        case Arch::AlexnetBaseline: return "alexnet_baseline";
    }
    throw InvalidConfigError("to_string: bad Arch");
}

inline Arch arch_from_string(const std::string& s) {
    if (s == "dilated_resnet") return Arch::DilatedResnet;
    if (s == "resnet_baseline") return Arch::ResnetBaseline;
    if (s == "alexnet_baseline") return Arch::AlexnetBaseline;
    throw InvalidConfigError("arch_from_string: '" + s + "'");
}

// Desk-scale model family. The dilated net keeps spatial resolution through
// stages 2-3 by swapping stride for growing dilation; the resnet baseline
// downsamples instead; the alexnet baseline is a plain conv stack without
// skips.
struct ModelConfig {
    Arch arch = Arch::DilatedResnet;
    int input_size = 64;
    int stem_channels = 16;
    std::array<int, 3> stage_channels = {16, 32, 64};
    std::array<int, 3> stage_blocks = {2, 2, 2};
    std::array<int, 3> stage_dilations = {1, 2, 4};
    int num_classes = 4;

    void check() const {
        if (num_classes < 2) throw InvalidConfigError("ModelConfig: num_classes");
        if (input_size < 8) throw InvalidConfigError("ModelConfig: input_size");
        for (int d : stage_dilations)
            if (d < 1) throw InvalidConfigError("ModelConfig: dilation < 1");
        if (arch == Arch::DilatedResnet &&
            !(stage_dilations[0] < stage_dilations[1] &&
              stage_dilations[1] < stage_dilations[2]))
            throw InvalidConfigError(
                "ModelConfig: dilated_resnet needs strictly increasing dilations");
        if (arch == Arch::AlexnetBaseline && input_size % 8 != 0)
            throw InvalidConfigError(
                "ModelConfig: alexnet baseline needs input divisible by 8");
    }

    nlohmann::json to_json() const {
        return {{"arch", to_string(arch)},
                {"input_size", input_size},
                {"stem_channels", stem_channels},
                {"stage_channels", stage_channels},
                {"stage_blocks", stage_blocks},
                {"stage_dilations", stage_dilations},
                {"num_classes", num_classes}};
    }
    static ModelConfig from_json(const nlohmann::json& j) {
        ModelConfig c;
        c.arch = arch_from_string(j.at("arch").get<std::string>());
        c.input_size = j.at("input_size").get<int>();
        c.stem_channels = j.at("stem_channels").get<int>();
        auto sc = j.at("stage_channels").get<std::vector<int>>();
        auto sb = j.at("stage_blocks").get<std::vector<int>>();
        auto sd = j.at("stage_dilations").get<std::vector<int>>();
        std::copy_n(sc.begin(), 3, c.stage_channels.begin());
        std::copy_n(sb.begin(), 3, c.stage_blocks.begin());
        std::copy_n(sd.begin(), 3, c.stage_dilations.begin());
        c.num_classes = j.at("num_classes").get<int>();
        c.check();
        return c;
    }
};

template <typename T>
class Model {
public:
    ModelConfig config;
    std::uint64_t init_seed = 0;

    Tensor<T> forward(const Tensor<T>& x, bool train) {
        Tensor<T> cur = x;
        for (auto& layer : layers_) cur = layer->forward(cur, train);
        return cur;
    }

    Tensor<T> backward(const Tensor<T>& dlogits) {
        Tensor<T> cur = dlogits;
        for (auto it = layers_.rbegin(); it != layers_.rend(); ++it)
            cur = (*it)->backward(cur);
        return cur;
    }

    std::vector<Tensor<T>*> params() {
        std::vector<Tensor<T>*> out;
        for (auto& layer : layers_)
            for (Tensor<T>* p : layer->params()) out.push_back(p);
        return out;
    }
    std::vector<std::vector<T>*> buffers() {
        std::vector<std::vector<T>*> out;
        for (auto& layer : layers_)
            for (auto* b : layer->buffers()) out.push_back(b);
        return out;
    }

    std::size_t param_count() {
        std::size_t n = 0;
        for (Tensor<T>* p : params()) n += p->numel();
        return n;
    }

    void zero_grad() {
        for (Tensor<T>* p : params()) p->zero_grad();
    }

    void add(std::unique_ptr<Layer<T>> layer) {
        layers_.push_back(std::move(layer));
    }
    std::vector<std::unique_ptr<Layer<T>>>& layers() { return layers_; }
    const std::vector<std::unique_ptr<Layer<T>>>& layers() const {
        return layers_;
    }

private:
    std::vector<std::unique_ptr<Layer<T>>> layers_;
};

// He fan-in normal for conv/linear weights, zero biases; batch norm keeps its
// constructor state (gamma=1, beta=0). One stream in declaration order.
template <typename T>
void init_layer(Layer<T>& layer, Rng& rng) {
    if (auto* block = dynamic_cast<ResidualBlock<T>*>(&layer)) {
        for (Layer<T>* sub : block->sublayers()) init_layer(*sub, rng);
        return;
    }
    if (auto* conv = dynamic_cast<Conv2d<T>*>(&layer)) {
        double stddev = std::sqrt(2.0 / conv->fan_in());
        for (auto& w : conv->weight().data)
            w = static_cast<T>(rng.normal(0.0, stddev));
        std::fill(conv->bias().data.begin(), conv->bias().data.end(), T(0));
        return;
    }
    if (auto* lin = dynamic_cast<Linear<T>*>(&layer)) {
        double stddev = std::sqrt(2.0 / lin->fan_in());
        for (auto& w : lin->weight().data)
            w = static_cast<T>(rng.normal(0.0, stddev));
        std::fill(lin->bias().data.begin(), lin->bias().data.end(), T(0));
        return;
    }
}

template <typename T>
Model<T> build_model(const ModelConfig& cfg, std::uint64_t init_seed,
                     int jobs = 0) {
    cfg.check();
    Model<T> model;
    model.config = cfg;
    model.init_seed = init_seed;

    const auto& ch = cfg.stage_channels;
    const auto& nb = cfg.stage_blocks;

    if (cfg.arch == Arch::DilatedResnet || cfg.arch == Arch::ResnetBaseline) {
        bool dilated = cfg.arch == Arch::DilatedResnet;
        model.add(std::make_unique<Conv2d<T>>(3, cfg.stem_channels, 3, 1, 1, 1,
                                              false, jobs));
        model.add(std::make_unique<BatchNorm2d<T>>(cfg.stem_channels));
        model.add(std::make_unique<ReLU<T>>());

        int in_ch = cfg.stem_channels;
        for (int stage = 0; stage < 3; ++stage) {
            int dil = dilated ? cfg.stage_dilations[stage] : 1;
            // stage 1 always downsamples once; the baseline also downsamples
            // in stages 2-3 where the dilated net holds resolution
            int first_stride = stage == 0 ? 2 : (dilated ? 1 : 2);
            for (int b = 0; b < nb[stage]; ++b) {
                int stride = b == 0 ? first_stride : 1;
                model.add(std::make_unique<ResidualBlock<T>>(in_ch, ch[stage],
                                                             stride, dil, jobs));
                in_ch = ch[stage];
            }
        }
        model.add(std::make_unique<GlobalAvgPool<T>>());
        model.add(std::make_unique<Linear<T>>(in_ch, cfg.num_classes));
    } else {
        // alexnet-style: five conv layers with pooling, two fully connected
        int c1 = ch[0], c2 = ch[1], c3 = ch[2];
        model.add(std::make_unique<Conv2d<T>>(3, c1, 3, 1, 1, 1, true, jobs));
        model.add(std::make_unique<ReLU<T>>());
        model.add(std::make_unique<MaxPool2d<T>>());
        model.add(std::make_unique<Conv2d<T>>(c1, c2, 3, 1, 1, 1, true, jobs));
        model.add(std::make_unique<ReLU<T>>());
        model.add(std::make_unique<MaxPool2d<T>>());
        model.add(std::make_unique<Conv2d<T>>(c2, c3, 3, 1, 1, 1, true, jobs));
        model.add(std::make_unique<ReLU<T>>());
        model.add(std::make_unique<Conv2d<T>>(c3, c3, 3, 1, 1, 1, true, jobs));
        model.add(std::make_unique<ReLU<T>>());
        model.add(std::make_unique<Conv2d<T>>(c3, c3, 3, 1, 1, 1, true, jobs));
        model.add(std::make_unique<ReLU<T>>());
        model.add(std::make_unique<MaxPool2d<T>>());
        model.add(std::make_unique<Flatten<T>>());
        int feat = c3 * (cfg.input_size / 8) * (cfg.input_size / 8);
        model.add(std::make_unique<Linear<T>>(feat, 128));
        model.add(std::make_unique<ReLU<T>>());
        model.add(std::make_unique<Linear<T>>(128, cfg.num_classes));
    }

    // He fan-in init over the layer list in declaration order.
    Rng rng(init_seed);
    for (auto& layer : model.layers()) init_layer(*layer, rng);
    return model;
}

// ---------------------------------------------------------------------------
// Softmax cross-entropy, mean over the batch.
// ---------------------------------------------------------------------------

template <typename T>
struct LossResult {
    double loss = 0.0;
    Tensor<T> logits;
    Tensor<T> dlogits;
    std::vector<std::array<double, 4>> probabilities;  // per sample (4-class)
};

template <typename T>
LossResult<T> softmax_cross_entropy(const Tensor<T>& logits,
                                    const std::vector<int>& labels) {
    const int n = logits.dim(0);
    const int k = static_cast<int>(logits.numel()) / n;
    if (static_cast<std::size_t>(n) != labels.size())
        throw LengthMismatchError("softmax_cross_entropy: batch size mismatch");

    LossResult<T> res;
    res.logits = logits;
    res.dlogits = Tensor<T>(logits.shape);
    res.probabilities.resize(static_cast<std::size_t>(n));

    double total = 0.0;
    for (int s = 0; s < n; ++s) {
        if (labels[s] < 0 || labels[s] >= k)
            throw LabelOutOfRangeError("softmax_cross_entropy: label " +
                                       std::to_string(labels[s]));
        const T* row = logits.data.data() + static_cast<std::size_t>(s) * k;
        double mx = row[0];
        for (int j = 1; j < k; ++j) mx = std::max<double>(mx, row[j]);
        double denom = 0.0;
        for (int j = 0; j < k; ++j) denom += std::exp(static_cast<double>(row[j]) - mx);
        double logp = static_cast<double>(row[labels[s]]) - mx - std::log(denom);
        total -= logp;
        for (int j = 0; j < k; ++j) {
            double p = std::exp(static_cast<double>(row[j]) - mx) / denom;
            if (j < 4)
                res.probabilities[s][static_cast<std::size_t>(j)] = p;
            res.dlogits.data[static_cast<std::size_t>(s) * k + j] =
                static_cast<T>((p - (j == labels[s] ? 1.0 : 0.0)) / n);
        }
    }
    res.loss = total / n;
    return res;
}

template <typename T>
LossResult<T> forward_loss(Model<T>& model, const Tensor<T>& images,
                           const std::vector<int>& labels, bool train) {
    Tensor<T> logits = model.forward(images, train);
    return softmax_cross_entropy(logits, labels);
}

// ---------------------------------------------------------------------------
// Checkpoints: JSON header + little-endian float32 blob of parameters then
// buffers, in declaration order.
// ---------------------------------------------------------------------------

template <typename T>
void save_checkpoint(Model<T>& model, const std::string& path_prefix,
                     const nlohmann::json& extra = nlohmann::json::object()) {
    nlohmann::json header;
    header["model"] = model.config.to_json();
    header["init_seed"] = model.init_seed;
    header["extra"] = extra;

    std::size_t count = 0;
    for (Tensor<T>* p : model.params()) count += p->numel();
    for (auto* b : model.buffers()) count += b->size();
    header["value_count"] = count;

    std::ofstream hout(path_prefix + ".json");
    if (!hout) throw IoError("save_checkpoint: cannot write header");
    hout << header.dump(2) << "\n";

    std::ofstream bout(path_prefix + ".bin", std::ios::binary);
    if (!bout) throw IoError("save_checkpoint: cannot write blob");
    auto put = [&bout](T v) {
        float f = static_cast<float>(v);
        std::uint32_t bits;
        std::memcpy(&bits, &f, 4);
        unsigned char b[4] = {static_cast<unsigned char>(bits),
                              static_cast<unsigned char>(bits >> 8),
                              static_cast<unsigned char>(bits >> 16),
                              static_cast<unsigned char>(bits >> 24)};
        bout.write(reinterpret_cast<const char*>(b), 4);
    };
    for (Tensor<T>* p : model.params())
        for (T v : p->data) put(v);
    for (auto* b : model.buffers())
        for (T v : *b) put(v);
}

template <typename T>
Model<T> load_checkpoint(const std::string& path_prefix, int jobs = 0,
                         nlohmann::json* extra_out = nullptr) {
    std::ifstream hin(path_prefix + ".json");
    if (!hin)
        throw MissingCheckpointError("load_checkpoint: missing " + path_prefix +
                                     ".json");
    nlohmann::json header;
    try {
        hin >> header;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigParseError(std::string("load_checkpoint: ") + e.what());
    }
    ModelConfig cfg = ModelConfig::from_json(header.at("model"));
    Model<T> model = build_model<T>(cfg, header.at("init_seed").get<std::uint64_t>(),
                                    jobs);
    if (extra_out != nullptr) *extra_out = header.value("extra", nlohmann::json());

    std::ifstream bin(path_prefix + ".bin", std::ios::binary);
    if (!bin)
        throw MissingCheckpointError("load_checkpoint: missing " + path_prefix +
                                     ".bin");
    auto get = [&bin, &path_prefix]() {
        unsigned char b[4];
        bin.read(reinterpret_cast<char*>(b), 4);
        if (!bin)
            throw IoError("load_checkpoint: truncated blob " + path_prefix);
        std::uint32_t bits = std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) |
                             (std::uint32_t(b[2]) << 16) |
                             (std::uint32_t(b[3]) << 24);
        float f;
        std::memcpy(&f, &bits, 4);
        return static_cast<T>(f);
    };
    for (Tensor<T>* p : model.params())
        for (T& v : p->data) v = get();
    for (auto* b : model.buffers())
        for (T& v : *b) v = get();
    return model;
}

}  // namespace vts::nn
