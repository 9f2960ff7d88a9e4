#pragma once

/* Test-only reference oracle: 50-significant-digit evaluation of the
 * q-Pochhammer products by direct multiplication, sharing no code with the
 * library's log-domain path.  Term counts are chosen so the neglected tail
 * is far below 50 digits for the parameters used in tests. */

#include <boost/multiprecision/cpp_dec_float.hpp>

namespace oracle {

using hp = boost::multiprecision::cpp_dec_float_50;

inline hp one_plus_inf(const hp& x, const hp& q, int terms = 4000) {
    hp prod = 1, qj = 1;
    for (int j = 0; j < terms; ++j) {
        prod *= 1 + qj * x;
        qj *= q;
    }
    return prod;
}

inline hp one_plus_real(const hp& x, const hp& alpha, const hp& q, int terms = 4000) {
    return one_plus_inf(x, q, terms) / one_plus_inf(pow(q, alpha) * x, q, terms);
}

inline double as_double(const hp& v) { return v.convert_to<double>(); }

} // namespace oracle
