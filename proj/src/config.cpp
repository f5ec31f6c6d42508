#include "dresfl/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "dresfl/errors.hpp"

namespace dresfl {

namespace {

std::string trim(const std::string& s) {
    auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::size_t> parse_dims(const std::string& s) {
    std::vector<std::size_t> dims;
    std::istringstream in(s);
    std::string tok;
    while (std::getline(in, tok, ',')) dims.push_back(std::stoul(trim(tok)));
    return dims;
}

}  // namespace

ExperimentSpec ExperimentSpec::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    return parse(in, path);
}

ExperimentSpec ExperimentSpec::parse(std::istream& in, const std::string& name) {
    ExperimentSpec spec;
    spec.dims.clear();

    using Setter = std::function<void(ExperimentSpec&, const std::string&)>;
    static const std::map<std::string, Setter> setters = {
        {"field.modulus", [](ExperimentSpec& s, const std::string& v) { s.modulus = v; }},
        {"coding.n_clients", [](ExperimentSpec& s, const std::string& v) { s.n_clients = std::stoi(v); }},
        {"coding.shards", [](ExperimentSpec& s, const std::string& v) { s.shards = std::stoi(v); }},
        {"coding.privacy", [](ExperimentSpec& s, const std::string& v) { s.privacy = std::stoi(v); }},
        {"model.dims", [](ExperimentSpec& s, const std::string& v) { s.dims = parse_dims(v); }},
        {"model.init_bound", [](ExperimentSpec& s, const std::string& v) { s.init_bound = std::stol(v); }},
        {"quant.scale_bits", [](ExperimentSpec& s, const std::string& v) { s.scale_bits = std::stoi(v); }},
        {"quant.label_scale_bits", [](ExperimentSpec& s, const std::string& v) { s.label_scale_bits = std::stoi(v); }},
        {"quant.shift", [](ExperimentSpec& s, const std::string& v) { s.shift = std::stod(v); }},
        {"train.batch", [](ExperimentSpec& s, const std::string& v) { s.batch = std::stoul(v); }},
        {"train.rounds", [](ExperimentSpec& s, const std::string& v) { s.rounds = std::stoi(v); }},
        {"train.lr", [](ExperimentSpec& s, const std::string& v) { s.lr = std::stod(v); }},
        {"train.lr_decay_factor", [](ExperimentSpec& s, const std::string& v) { s.lr_decay_factor = std::stod(v); }},
        {"train.lr_decay_interval", [](ExperimentSpec& s, const std::string& v) { s.lr_decay_interval = std::stoi(v); }},
        {"train.clip_norm", [](ExperimentSpec& s, const std::string& v) {
             if (v == "none") s.clip_norm.reset();
             else s.clip_norm = std::stod(v);
         }},
        {"dropout.enabled", [](ExperimentSpec& s, const std::string& v) { s.dropout_enabled = (v == "true" || v == "1"); }},
        {"data.source", [](ExperimentSpec& s, const std::string& v) { s.source = v; }},
        {"data.train_path", [](ExperimentSpec& s, const std::string& v) { s.train_path = v; }},
        {"data.test_path", [](ExperimentSpec& s, const std::string& v) { s.test_path = v; }},
        {"data.synth_train", [](ExperimentSpec& s, const std::string& v) { s.synth_train = std::stoul(v); }},
        {"data.synth_test", [](ExperimentSpec& s, const std::string& v) { s.synth_test = std::stoul(v); }},
        {"data.synth_clusters", [](ExperimentSpec& s, const std::string& v) { s.synth_clusters = std::stoul(v); }},
        {"data.synth_dx", [](ExperimentSpec& s, const std::string& v) { s.synth_dx = std::stoul(v); }},
        {"data.synth_classes", [](ExperimentSpec& s, const std::string& v) { s.synth_classes = std::stoi(v); }},
        {"data.synth_seed", [](ExperimentSpec& s, const std::string& v) { s.synth_seed = std::stoull(v); }},
        {"data.synth_noise", [](ExperimentSpec& s, const std::string& v) { s.synth_noise = std::stod(v); }},
        {"seeds.sampling", [](ExperimentSpec& s, const std::string& v) { s.seeds.sampling = std::stoull(v); }},
        {"seeds.masks", [](ExperimentSpec& s, const std::string& v) { s.seeds.masks = std::stoull(v); }},
        {"seeds.dropout", [](ExperimentSpec& s, const std::string& v) { s.seeds.dropout = std::stoull(v); }},
        {"seeds.quantization", [](ExperimentSpec& s, const std::string& v) { s.seeds.quantization = std::stoull(v); }},
        {"seeds.init", [](ExperimentSpec& s, const std::string& v) { s.seeds.init = std::stoull(v); }},
        {"capacity.override", [](ExperimentSpec& s, const std::string& v) { s.capacity_override = (v == "true" || v == "1"); }},
    };

    std::string section, line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string where = name + ":" + std::to_string(lineno);
        std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']') throw ConfigError(where + ": unterminated section header");
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        auto eq = t.find('=');
        if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
        std::string key = section + "." + trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        auto it = setters.find(key);
        if (it == setters.end()) throw ConfigError(where + ": unknown key '" + key + "'");
        try {
            it->second(spec, value);
        } catch (const std::exception& e) {
            throw ConfigError(where + ": bad value '" + value + "' for " + key + " (" + e.what() + ")");
        }
    }
    if (spec.dims.empty()) throw ConfigError(name + ": missing model.dims");
    spec.validate();
    return spec;
}

void ExperimentSpec::validate() const {
    if (dims.size() < 2) throw ConfigError("model.dims needs at least input and output dims");
    if (n_clients < 1 || shards < 1 || privacy < 0) {
        throw ConfigError("coding parameters out of range");
    }
    if (batch < 1 || rounds < 1 || lr <= 0) throw ConfigError("train parameters out of range");
    if (scale_bits < 0 || shift < 0) throw ConfigError("quant parameters out of range");
    if (source != "synthetic" && source != "clusters" && source != "csv") {
        throw ConfigError("data.source must be 'synthetic', 'clusters', or 'csv'");
    }
    if (source == "csv" && (train_path.empty() || test_path.empty())) {
        throw ConfigError("data.source = csv requires train_path and test_path");
    }
}

void ExperimentSpec::echo(std::ostream& out) const {
    out << "[field]\nmodulus = " << modulus << "\n";
    out << "[coding]\nn_clients = " << n_clients << "\nshards = " << shards
        << "\nprivacy = " << privacy << "\n";
    out << "[model]\ndims = ";
    for (std::size_t i = 0; i < dims.size(); ++i) out << (i ? "," : "") << dims[i];
    out << "\ninit_bound = " << init_bound << "\n";
    out << "[quant]\nscale_bits = " << scale_bits << "\nlabel_scale_bits = " << label_bits()
        << "\nshift = " << shift << "\n";
    out << "[train]\nbatch = " << batch << "\nrounds = " << rounds << "\nlr = " << lr
        << "\nlr_decay_factor = " << lr_decay_factor
        << "\nlr_decay_interval = " << lr_decay_interval << "\nclip_norm = ";
    if (clip_norm) out << *clip_norm;
    else out << "none";
    out << "\n[dropout]\nenabled = " << (dropout_enabled ? "true" : "false") << "\n";
    out << "[data]\nsource = " << source << "\n";
    if (source == "csv") {
        out << "train_path = " << train_path << "\ntest_path = " << test_path << "\n";
    } else {
        if (source == "clusters") out << "synth_clusters = " << synth_clusters << "\n";
        out << "synth_train = " << synth_train << "\nsynth_test = " << synth_test
            << "\nsynth_dx = " << synth_dx << "\nsynth_classes = " << synth_classes
            << "\nsynth_seed = " << synth_seed << "\nsynth_noise = " << synth_noise << "\n";
    }
    out << "[seeds]\nsampling = " << seeds.sampling << "\nmasks = " << seeds.masks
        << "\ndropout = " << seeds.dropout << "\nquantization = " << seeds.quantization
        << "\ninit = " << seeds.init << "\n";
    out << "[capacity]\noverride = " << (capacity_override ? "true" : "false") << "\n";
}

}  // namespace dresfl
