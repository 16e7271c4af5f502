#include "ids/text_format.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace ids {

namespace {

constexpr std::string_view kVersionLine = "# ids-text v1";

std::size_t product(const std::vector<std::size_t>& dims) {
    std::size_t n = 1;
    for (std::size_t d : dims) { n *= d; }
    return n;
}

double parse_double(const std::string& token) {
    double value = 0.0;
    const char* first = token.data();
    const char* last = first + token.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) { throw ConfigError("malformed number '" + token + "'"); }
    return value;
}

std::size_t to_index(double value, const char* what) {
    if (!(value >= 0.0) || value != std::floor(value) || value > 1e15) {
        throw ConfigError(std::string("malformed ") + what + " index");
    }
    return std::size_t(value);
}

std::vector<double> as_doubles(std::span<const std::size_t> xs) { return {xs.begin(), xs.end()}; }

MdpShape read_shape(const TextDocument& doc) {
    const Tensor& t = doc.require("shape", 3);
    const MdpShape shape{to_index(t.values[0], "shape"), to_index(t.values[1], "shape"),
                         to_index(t.values[2], "shape")};
    if (shape.states == 0 || shape.actions == 0 || shape.horizon == 0) {
        throw ConfigError("shape entries must be positive");
    }
    return shape;
}

void put_known_parts(TextDocument& doc, const MdpShape& shape, std::span<const double> rewards,
                     std::size_t initial_state) {
    doc.tensors["shape"] = {{3}, {double(shape.states), double(shape.actions), double(shape.horizon)}};
    doc.tensors["initial_state"] = {{1}, {double(initial_state)}};
    doc.tensors["rewards"] = {{shape.horizon, shape.states, shape.actions}, {rewards.begin(), rewards.end()}};
}

} // namespace

const Tensor& TextDocument::require(const std::string& name, std::size_t expected) const {
    const auto it = tensors.find(name);
    if (it == tensors.end()) { throw ConfigError("missing tensor '" + name + "'"); }
    if (it->second.values.size() != expected) {
        throw ConfigError("tensor '" + name + "' has " + std::to_string(it->second.values.size()) +
                          " values, expected " + std::to_string(expected));
    }
    return it->second;
}

std::string format_double(double value) {
    if (std::isnan(value)) { return "nan"; }
    if (std::isinf(value)) { return value > 0 ? "inf" : "-inf"; }
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, ptr);
}

void write_document(std::ostream& out, const TextDocument& doc) {
    out << kVersionLine << '\n' << "kind " << doc.kind << '\n';
    for (const auto& [name, tensor] : doc.tensors) {
        out << "tensor " << name;
        for (std::size_t d : tensor.dims) { out << ' ' << d; }
        out << '\n';
        for (std::size_t i = 0; i < tensor.values.size(); ++i) {
            out << format_double(tensor.values[i]) << (i + 1 == tensor.values.size() ? '\n' : ' ');
        }
    }
}

TextDocument read_document(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kVersionLine) {
        throw ConfigError("expected version line '" + std::string(kVersionLine) + "'");
    }
    TextDocument doc;
    std::string word;
    if (!(in >> word) || word != "kind" || !(in >> doc.kind)) { throw ConfigError("expected 'kind <name>'"); }
    while (in >> word) {
        if (word != "tensor") { throw ConfigError("expected 'tensor', found '" + word + "'"); }
        std::string name;
        if (!(in >> name)) { throw ConfigError("tensor name missing"); }
        std::getline(in, line);
        std::istringstream header(line);
        Tensor tensor;
        std::string token;
        while (header >> token) { tensor.dims.push_back(to_index(parse_double(token), "dimension")); }
        const std::size_t n = product(tensor.dims);
        tensor.values.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            if (!(in >> token)) { throw ConfigError("tensor '" + name + "' is truncated"); }
            tensor.values.push_back(parse_double(token));
        }
        if (!doc.tensors.emplace(name, std::move(tensor)).second) {
            throw ConfigError("duplicate tensor '" + name + "'");
        }
    }
    return doc;
}

TextDocument to_document(const Posterior& posterior) {
    TextDocument doc;
    const MdpShape shape = shape_of(posterior);
    const auto rewards = rewards_of(posterior);
    put_known_parts(doc, shape, rewards, initial_state_of(posterior));
    if (const auto* dir = std::get_if<DirichletProduct>(&posterior)) {
        doc.kind = "dirichlet";
        doc.tensors["counts"] = {{shape.horizon, shape.states, shape.actions, shape.states},
                                 {dir->counts().begin(), dir->counts().end()}};
        return doc;
    }
    const auto& fs = std::get<FiniteSupportPrior>(posterior);
    doc.kind = "finite-support";
    doc.tensors["probs"] = {{fs.size()}, {fs.probs().begin(), fs.probs().end()}};
    Tensor kernels{{fs.size(), shape.horizon, shape.states, shape.actions, shape.states}, {}};
    kernels.values.reserve(fs.size() * shape.transition_size());
    for (const auto& env : fs.envs()) {
        kernels.values.insert(kernels.values.end(), env.transitions().begin(), env.transitions().end());
    }
    doc.tensors["transitions"] = std::move(kernels);
    return doc;
}

Posterior posterior_from_document(const TextDocument& doc) {
    const MdpShape shape = read_shape(doc);
    const std::size_t init = to_index(doc.require("initial_state", 1).values[0], "initial state");
    const auto& rewards = doc.require("rewards", shape.reward_size()).values;
    try {
        if (doc.kind == "dirichlet") {
            return DirichletProduct(shape, doc.require("counts", shape.transition_size()).values, rewards, init);
        }
        if (doc.kind == "finite-support") {
            const auto& probs = doc.tensors.count("probs") ? doc.tensors.at("probs").values : std::vector<double>{};
            if (probs.empty()) { throw ConfigError("missing tensor 'probs'"); }
            const auto& kernels = doc.require("transitions", probs.size() * shape.transition_size()).values;
            std::vector<TabularMdp> envs;
            for (std::size_t i = 0; i < probs.size(); ++i) {
                const auto first = kernels.begin() + std::ptrdiff_t(i * shape.transition_size());
                envs.emplace_back(shape, std::vector<double>(first, first + std::ptrdiff_t(shape.transition_size())),
                                  rewards, init);
            }
            return FiniteSupportPrior(std::move(envs), probs);
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("invalid posterior: ") + e.what());
    }
    throw ConfigError("unknown posterior kind '" + doc.kind + "'");
}

TextDocument to_document(const Partition& partition) {
    TextDocument doc;
    doc.kind = "partition";
    doc.tensors["epsilon"] = {{1}, {partition.epsilon}};
    doc.tensors["cell_of"] = {{partition.cell_of.size()}, as_doubles(partition.cell_of)};
    return doc;
}

Partition partition_from_document(const TextDocument& doc) {
    if (doc.kind != "partition") { throw ConfigError("expected a partition document"); }
    Partition partition;
    partition.epsilon = doc.require("epsilon", 1).values[0];
    const auto it = doc.tensors.find("cell_of");
    if (it == doc.tensors.end()) { throw ConfigError("missing tensor 'cell_of'"); }
    for (std::size_t i = 0; i < it->second.values.size(); ++i) {
        const std::size_t cell = to_index(it->second.values[i], "cell");
        if (cell > partition.cells.size()) { throw ConfigError("cells must be numbered by first appearance"); }
        if (cell == partition.cells.size()) { partition.cells.emplace_back(); }
        partition.cells[cell].push_back(i);
        partition.cell_of.push_back(cell);
    }
    return partition;
}

TextDocument to_document(const SurrogateLaw& law) {
    TextDocument doc;
    doc.kind = "surrogate-law";
    Tensor t{{law.cells.size(), 3}, {}};
    for (const auto& cell : law.cells) {
        if (cell) {
            t.values.insert(t.values.end(), {double(cell->first), double(cell->second), cell->weight});
        } else {
            t.values.insert(t.values.end(), {-1.0, -1.0, 0.0});
        }
    }
    doc.tensors["law"] = std::move(t);
    return doc;
}

SurrogateLaw surrogate_law_from_document(const TextDocument& doc) {
    if (doc.kind != "surrogate-law") { throw ConfigError("expected a surrogate-law document"); }
    const auto it = doc.tensors.find("law");
    if (it == doc.tensors.end() || it->second.dims.size() != 2 || it->second.dims[1] != 3) {
        throw ConfigError("surrogate law tensor must have shape K x 3");
    }
    SurrogateLaw law;
    const auto& v = it->second.values;
    for (std::size_t k = 0; k < it->second.dims[0]; ++k) {
        if (v[3 * k] < 0.0) {
            law.cells.emplace_back();
            continue;
        }
        const double w = v[3 * k + 2];
        if (!(w >= 0.0 && w <= 1.0)) { throw ConfigError("surrogate weight must lie in [0,1]"); }
        law.cells.emplace_back(DominancePair{to_index(v[3 * k], "env"), to_index(v[3 * k + 1], "env"), w});
    }
    return law;
}

void save_document(const std::string& path, const TextDocument& doc) {
    std::ofstream out(path);
    if (!out) { throw std::runtime_error("cannot open '" + path + "' for writing"); }
    write_document(out, doc);
    if (!out) { throw std::runtime_error("failed writing '" + path + "'"); }
}

TextDocument load_document(const std::string& path) {
    std::ifstream in(path);
    if (!in) { throw ConfigError("cannot open '" + path + "'"); }
    return read_document(in);
}

} // namespace ids
