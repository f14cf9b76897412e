#include "drugner/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include "drugner/util.hpp"

namespace drugner {

namespace {

std::size_t tensor_elements(const TensorBlob& t) {
    std::size_t n = 1;
    for (auto d : t.shape) n *= d;
    return n;
}

}  // namespace

const std::string* Checkpoint::find(const std::string& key) const {
    for (const auto& [k, v] : config)
        if (k == key) return &v;
    return nullptr;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path, bool binary) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write checkpoint " + path);
    out << "drugner-checkpoint v1\n";
    out << "format " << (binary ? "bin" : "text") << "\n";
    out << "kind " << ckpt.kind << "\n";
    out << "seed " << ckpt.seed << "\n";
    out << "config " << ckpt.config.size() << "\n";
    for (const auto& [k, v] : ckpt.config) out << k << " = " << v << "\n";
    out << "tensors " << ckpt.tensors.size() << "\n";
    for (const auto& t : ckpt.tensors) {
        out << "tensor " << t.name << " " << t.shape.size();
        for (auto d : t.shape) out << " " << d;
        out << "\n";
        if (t.data.size() != tensor_elements(t))
            throw DataError("tensor " + t.name + " shape/data mismatch");
        if (binary) {
            for (double x : t.data) {
                float f = static_cast<float>(x);
                char buf[4];
                std::memcpy(buf, &f, 4);
                out.write(buf, 4);
            }
            out << "\n";
        } else {
            for (std::size_t i = 0; i < t.data.size(); ++i) {
                if (i) out << ' ';
                out << fmt_g9(static_cast<float>(t.data[i]));
            }
            out << "\n";
        }
    }
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint " + path);
    std::string line;
    auto expect_line = [&](const std::string& what) -> std::string {
        if (!std::getline(in, line)) throw DataError("truncated checkpoint " + path + ": " + what);
        return line;
    };
    if (expect_line("magic") != "drugner-checkpoint v1")
        throw DataError("bad checkpoint magic in " + path);
    std::string fmt = expect_line("format");
    bool binary;
    if (fmt == "format bin") {
        binary = true;
    } else if (fmt == "format text") {
        binary = false;
    } else {
        throw DataError("bad checkpoint format line in " + path);
    }
    Checkpoint ckpt;
    {
        std::istringstream ls(expect_line("kind"));
        std::string key;
        ls >> key >> ckpt.kind;
        if (key != "kind") throw DataError("bad checkpoint kind line in " + path);
    }
    {
        std::istringstream ls(expect_line("seed"));
        std::string key;
        ls >> key >> ckpt.seed;
        if (key != "seed") throw DataError("bad checkpoint seed line in " + path);
    }
    std::size_t nconfig = 0;
    {
        std::istringstream ls(expect_line("config count"));
        std::string key;
        ls >> key >> nconfig;
        if (key != "config") throw DataError("bad checkpoint config line in " + path);
    }
    for (std::size_t i = 0; i < nconfig; ++i) {
        std::string row = expect_line("config entry");
        auto pos = row.find(" = ");
        if (pos == std::string::npos) throw DataError("bad config entry in " + path);
        ckpt.config.emplace_back(row.substr(0, pos), row.substr(pos + 3));
    }
    std::size_t ntensors = 0;
    {
        std::istringstream ls(expect_line("tensor count"));
        std::string key;
        ls >> key >> ntensors;
        if (key != "tensors") throw DataError("bad checkpoint tensors line in " + path);
    }
    for (std::size_t i = 0; i < ntensors; ++i) {
        std::istringstream ls(expect_line("tensor header"));
        std::string key;
        TensorBlob t;
        std::size_t ndims = 0;
        ls >> key >> t.name >> ndims;
        if (key != "tensor") throw DataError("bad tensor header in " + path);
        t.shape.resize(ndims);
        for (auto& d : t.shape) ls >> d;
        std::size_t n = tensor_elements(t);
        t.data.resize(n);
        if (binary) {
            for (std::size_t j = 0; j < n; ++j) {
                char buf[4];
                in.read(buf, 4);
                if (!in) throw DataError("truncated tensor payload in " + path);
                float f;
                std::memcpy(&f, buf, 4);
                t.data[j] = f;
            }
            in.get();  // trailing newline
        } else {
            std::string row = expect_line("tensor payload");
            std::istringstream ps(row);
            for (std::size_t j = 0; j < n; ++j)
                if (!(ps >> t.data[j])) throw DataError("truncated tensor payload in " + path);
        }
        ckpt.tensors.push_back(std::move(t));
    }
    return ckpt;
}

namespace {

const char* act_name(nn::Act a) {
    switch (a) {
        case nn::Act::Sigmoid: return "sigmoid";
        case nn::Act::Tanh: return "tanh";
        case nn::Act::Softmax: return "softmax";
        case nn::Act::Identity: return "identity";
    }
    return "?";
}

nn::Act act_from(const std::string& name) {
    if (name == "sigmoid") return nn::Act::Sigmoid;
    if (name == "tanh") return nn::Act::Tanh;
    if (name == "softmax") return nn::Act::Softmax;
    if (name == "identity") return nn::Act::Identity;
    throw DataError("unknown activation in checkpoint: " + name);
}

}  // namespace

Checkpoint net_to_checkpoint(const nn::Net& net, const std::string& kind, std::uint64_t seed,
                             const ConfigEcho& extra) {
    Checkpoint ckpt;
    ckpt.kind = kind;
    ckpt.seed = seed;
    std::vector<std::string> acts;
    for (const auto& l : net.layers) acts.emplace_back(act_name(l.act));
    ckpt.config.emplace_back("activations", join(acts, ","));
    for (const auto& kv : extra) ckpt.config.push_back(kv);
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const auto& layer = net.layers[l];
        TensorBlob W;
        W.name = "layer" + std::to_string(l) + ".W";
        W.shape = {static_cast<std::size_t>(layer.out), static_cast<std::size_t>(layer.in)};
        W.data = layer.W;
        ckpt.tensors.push_back(std::move(W));
        TensorBlob b;
        b.name = "layer" + std::to_string(l) + ".b";
        b.shape = {static_cast<std::size_t>(layer.out)};
        b.data = layer.b;
        ckpt.tensors.push_back(std::move(b));
    }
    return ckpt;
}

nn::Net net_from_checkpoint(const Checkpoint& ckpt) {
    const std::string* acts_line = ckpt.find("activations");
    if (!acts_line) throw DataError("checkpoint missing activations entry");
    auto act_names = split_on(*acts_line, ',');
    nn::Net net;
    for (std::size_t l = 0; l < act_names.size(); ++l) {
        const TensorBlob *W = nullptr, *b = nullptr;
        std::string wn = "layer" + std::to_string(l) + ".W";
        std::string bn = "layer" + std::to_string(l) + ".b";
        for (const auto& t : ckpt.tensors) {
            if (t.name == wn) W = &t;
            if (t.name == bn) b = &t;
        }
        if (!W || !b || W->shape.size() != 2)
            throw DataError("checkpoint missing tensors for layer " + std::to_string(l));
        nn::Layer layer;
        layer.out = static_cast<int>(W->shape[0]);
        layer.in = static_cast<int>(W->shape[1]);
        layer.act = act_from(act_names[l]);
        layer.W = W->data;
        layer.b = b->data;
        net.layers.push_back(std::move(layer));
    }
    return net;
}

Checkpoint lstm_to_checkpoint(const LstmParams& params, std::uint64_t seed,
                              const ConfigEcho& extra) {
    Checkpoint ckpt;
    ckpt.kind = "lstm";
    ckpt.seed = seed;
    ckpt.config.emplace_back("input_dim", std::to_string(params.input_dim));
    std::vector<std::string> hidden;
    for (const auto& l : params.layers) hidden.push_back(std::to_string(l.hidden));
    ckpt.config.emplace_back("hidden_sizes", join(hidden, ","));
    for (const auto& kv : extra) ckpt.config.push_back(kv);
    auto add = [&](const std::string& name, const std::vector<double>& data,
                   std::vector<std::size_t> shape) {
        ckpt.tensors.push_back({name, std::move(shape), data});
    };
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        const auto& p = params.layers[l];
        const std::string pre = "layer" + std::to_string(l) + ".";
        std::size_t H = p.hidden, I = p.in;
        add(pre + "Wf", p.Wf, {H, I});
        add(pre + "Wc", p.Wc, {H, I});
        add(pre + "Wo", p.Wo, {H, I});
        add(pre + "Uf", p.Uf, {H, H});
        add(pre + "Uc", p.Uc, {H, H});
        add(pre + "Uo", p.Uo, {H, H});
        add(pre + "pf", p.pf, {H});
        add(pre + "po", p.po, {H});
        add(pre + "bf", p.bf, {H});
        add(pre + "bc", p.bc, {H});
        add(pre + "bo", p.bo, {H});
    }
    add("Wy", params.Wy, {params.Wy.size()});
    add("by", {params.by}, {1});
    return ckpt;
}

LstmParams lstm_from_checkpoint(const Checkpoint& ckpt) {
    const std::string* dim = ckpt.find("input_dim");
    const std::string* hidden = ckpt.find("hidden_sizes");
    if (!dim || !hidden) throw DataError("lstm checkpoint missing dimensions");
    LstmParams params;
    params.input_dim = std::stoi(*dim);
    auto find_tensor = [&](const std::string& name) -> const TensorBlob& {
        for (const auto& t : ckpt.tensors)
            if (t.name == name) return t;
        throw DataError("lstm checkpoint missing tensor " + name);
    };
    int in = params.input_dim;
    std::size_t l = 0;
    for (const auto& hs : split_on(*hidden, ',')) {
        int H = std::stoi(hs);
        LstmLayerParams p;
        p.in = in;
        p.hidden = H;
        const std::string pre = "layer" + std::to_string(l) + ".";
        p.Wf = find_tensor(pre + "Wf").data;
        p.Wc = find_tensor(pre + "Wc").data;
        p.Wo = find_tensor(pre + "Wo").data;
        p.Uf = find_tensor(pre + "Uf").data;
        p.Uc = find_tensor(pre + "Uc").data;
        p.Uo = find_tensor(pre + "Uo").data;
        p.pf = find_tensor(pre + "pf").data;
        p.po = find_tensor(pre + "po").data;
        p.bf = find_tensor(pre + "bf").data;
        p.bc = find_tensor(pre + "bc").data;
        p.bo = find_tensor(pre + "bo").data;
        params.layers.push_back(std::move(p));
        in = H;
        ++l;
    }
    params.Wy = find_tensor("Wy").data;
    params.by = find_tensor("by").data.at(0);
    return params;
}

}  // namespace drugner
