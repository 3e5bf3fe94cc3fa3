#pragma once

#include <cstdio>
#include <ostream>
#include <string>

#include "zdjscc/montecarlo.hpp"

namespace zdjscc {

inline constexpr const char* kSweepCsvHeader =
    "snr_db,rho_x,scheme,sdr_db,sdr_se_db,d1,d2,p1,p2,n_samples,seed";

/// Locale-independent formatting; %.10g keeps small distortions exact enough
/// to reproduce byte-for-byte.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

inline std::string to_csv_row(const SweepRecord& r) {
    std::string out;
    out += format_double(r.snr_db);
    out += ',';
    out += format_double(r.rho_x);
    out += ',';
    out += r.scheme;
    out += ',';
    out += format_double(r.sdr_db);
    out += ',';
    out += format_double(r.sdr_se_db);
    out += ',';
    out += format_double(r.d1);
    out += ',';
    out += format_double(r.d2);
    out += ',';
    out += format_double(r.p1);
    out += ',';
    out += format_double(r.p2);
    out += ',';
    out += std::to_string(r.n_samples);
    out += ',';
    out += std::to_string(r.seed);
    return out;
}

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRecord>& records) {
    os << kSweepCsvHeader << '\n';
    for (const SweepRecord& r : records) os << to_csv_row(r) << '\n';
}

}  // namespace zdjscc
