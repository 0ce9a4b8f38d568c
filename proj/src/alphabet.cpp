#include "ddsim/alphabet.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

namespace ddsim {

namespace {

// 2-bit Gray code to amplitude level: 00 -> -3, 01 -> -1, 11 -> +1, 10 -> +3
double gray2_level(unsigned bits) {
    static constexpr double levels[4] = {-3.0, -1.0, +3.0, +1.0};
    return levels[bits & 3u];
}

} // namespace

Alphabet Alphabet::bpsk() {
    Alphabet a;
    a.name = "BPSK";
    a.bits_per_symbol = 1;
    a.points = {cplx(1.0, 0.0), cplx(-1.0, 0.0)};
    return a;
}

Alphabet Alphabet::qpsk() {
    Alphabet a;
    a.name = "QPSK";
    a.bits_per_symbol = 2;
    const double s = 1.0 / std::sqrt(2.0);
    a.points.resize(4);
    for (unsigned label = 0; label < 4; ++label) {
        const double re = (label & 2u) ? -s : s;
        const double im = (label & 1u) ? -s : s;
        a.points[label] = cplx(re, im);
    }
    return a;
}

Alphabet Alphabet::qam16() {
    Alphabet a;
    a.name = "16QAM";
    a.bits_per_symbol = 4;
    const double s = 1.0 / std::sqrt(10.0);
    a.points.resize(16);
    for (unsigned label = 0; label < 16; ++label) {
        const double re = gray2_level(label >> 2) * s;
        const double im = gray2_level(label & 3u) * s;
        a.points[label] = cplx(re, im);
    }
    return a;
}

Alphabet Alphabet::from_name(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "bpsk") return bpsk();
    if (lower == "qpsk") return qpsk();
    if (lower == "16qam" || lower == "qam16") return qam16();
    throw std::invalid_argument("unknown modulation alphabet: " + std::string(name));
}

} // namespace ddsim
