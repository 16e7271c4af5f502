#pragma once

// Plain-text snapshots of posteriors, partitions and surrogate laws.
//
// A document is a version line, a kind line and a list of named tensors:
//
//     # ids-text v1
//     kind finite-support
//     tensor shape 3
//     2 2 2
//     tensor probs 3
//     0.5 0.25 0.25
//     ...
//
// Each tensor header gives its name and dimensions; the values follow in
// row-major order, whitespace separated. Doubles are written in shortest
// round-trip form so a snapshot reloads bit-exactly.

#include "ids/beliefs.hpp"
#include "ids/surrogate.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace ids {

struct Tensor {
    std::vector<std::size_t> dims;
    std::vector<double> values;
};

struct TextDocument {
    std::string kind;
    std::map<std::string, Tensor> tensors;

    /// Throws ConfigError when the tensor is missing or its size differs from `expected`.
    const Tensor& require(const std::string& name, std::size_t expected) const;
};

/// Shortest round-trip decimal form; "inf", "-inf" and "nan" for non-finite values.
std::string format_double(double value);

void write_document(std::ostream& out, const TextDocument& doc);
/// Throws ConfigError on malformed input.
TextDocument read_document(std::istream& in);

TextDocument to_document(const Posterior& posterior);
Posterior posterior_from_document(const TextDocument& doc);

TextDocument to_document(const Partition& partition);
Partition partition_from_document(const TextDocument& doc);

/// Empty cells are stored as (-1, -1, 0).
TextDocument to_document(const SurrogateLaw& law);
SurrogateLaw surrogate_law_from_document(const TextDocument& doc);

void save_document(const std::string& path, const TextDocument& doc);
TextDocument load_document(const std::string& path);

} // namespace ids
