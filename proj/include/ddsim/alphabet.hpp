// alphabet.hpp - Modulation alphabets with Gray bit labels.

#pragma once

#include "ddsim/types.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace ddsim {

// Constellation with unit mean symbol energy. points[label] is the symbol
// whose bit pattern is `label` (MSB first); bit errors between two decisions
// are popcount(label_a ^ label_b).
struct Alphabet {
    std::string name;
    int bits_per_symbol = 0;
    std::vector<cplx> points;

    int size() const { return static_cast<int>(points.size()); }

    static Alphabet bpsk();    // 0 -> +1, 1 -> -1
    static Alphabet qpsk();    // Gray, per-axis sign map
    static Alphabet qam16();   // Gray, levels {-3,-1,+1,+3}/sqrt(10)

    // Accepts "BPSK", "QPSK", "16QAM" (case-insensitive); throws otherwise.
    static Alphabet from_name(std::string_view name);
};

} // namespace ddsim
