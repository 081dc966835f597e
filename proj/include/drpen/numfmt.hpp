#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <string>

namespace drpen {

// Shortest representation that round-trips to the same double.
inline std::string format_full(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace detail {

// Rounds a plain decimal digit string (no sign, no exponent) at `places`
// fractional digits using round-half-even on the decimal digits.
inline std::string round_decimal_digits(std::string digits, int point, int places) {
    // digits = "ddd", value = 0.ddd * 10^point  is awkward; instead keep
    // digits with an explicit dot position: value = digits with dot after
    // `point` leading digits (point may exceed digits length => pad zeros).
    while (static_cast<int>(digits.size()) < point) digits.push_back('0');
    int frac = static_cast<int>(digits.size()) - point;
    if (frac <= places) {
        digits.append(static_cast<std::size_t>(places - frac), '0');
        frac = places;
    } else {
        int keep = point + places;
        if (keep < 0) keep = 0;
        char next = digits[static_cast<std::size_t>(keep)];
        bool rest_nonzero = false;
        for (std::size_t i = static_cast<std::size_t>(keep) + 1; i < digits.size(); ++i)
            if (digits[i] != '0') { rest_nonzero = true; break; }
        digits.resize(static_cast<std::size_t>(keep));
        bool round_up;
        if (next > '5') round_up = true;
        else if (next < '5') round_up = false;
        else if (rest_nonzero) round_up = true;
        else {
            char last = digits.empty() ? '0' : digits.back();
            round_up = ((last - '0') % 2) != 0;  // half to even
        }
        if (round_up) {
            int i = static_cast<int>(digits.size()) - 1;
            for (; i >= 0; --i) {
                if (digits[static_cast<std::size_t>(i)] == '9') {
                    digits[static_cast<std::size_t>(i)] = '0';
                } else {
                    ++digits[static_cast<std::size_t>(i)];
                    break;
                }
            }
            if (i < 0) { digits.insert(digits.begin(), '1'); ++point; }
        }
    }
    // assemble with `places` fractional digits
    std::string intpart = point <= 0 ? "0" : digits.substr(0, static_cast<std::size_t>(point));
    if (intpart.empty()) intpart = "0";
    std::string fracpart(static_cast<std::size_t>(places), '0');
    for (int i = 0; i < places; ++i) {
        int idx = point + i;
        if (idx >= 0 && idx < static_cast<int>(digits.size()))
            fracpart[static_cast<std::size_t>(i)] = digits[static_cast<std::size_t>(idx)];
        else if (idx < 0)
            fracpart[static_cast<std::size_t>(i)] = '0';
    }
    return places > 0 ? intpart + "." + fracpart : intpart;
}

}  // namespace detail

// Fixed-point rounding to `places` decimals with half-even ties on the
// decimal expansion of the shortest round-trip representation, so
// e.g. 0.7295 -> "0.730" even though the stored double is slightly below
// the tie. Non-finite values render as "nan"/"inf".
inline std::string format_round(double v, int places = 3) {
    if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
    std::string s = format_full(v);
    bool neg = false;
    if (!s.empty() && s[0] == '-') { neg = true; s.erase(s.begin()); }
    // split mantissa / exponent
    int exp10 = 0;
    auto epos = s.find_first_of("eE");
    if (epos != std::string::npos) {
        exp10 = std::stoi(s.substr(epos + 1));
        s.resize(epos);
    }
    std::string digits;
    int point = 0;
    auto dot = s.find('.');
    if (dot == std::string::npos) {
        digits = s;
        point = static_cast<int>(s.size());
    } else {
        digits = s.substr(0, dot) + s.substr(dot + 1);
        point = static_cast<int>(dot);
    }
    point += exp10;
    // strip leading zeros, keep point consistent
    while (digits.size() > 1 && digits[0] == '0') { digits.erase(digits.begin()); --point; }
    std::string out = detail::round_decimal_digits(digits, point, places);
    bool all_zero = out.find_first_not_of("0.") == std::string::npos;
    return (neg && !all_zero) ? "-" + out : out;
}

}  // namespace drpen
