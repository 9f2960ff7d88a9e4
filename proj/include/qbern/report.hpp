#pragma once

/* Check records and report writers.
 *
 * Every verification row is one CheckRecord.  CSV reports use the fixed
 * schema
 *
 *   check_id,q,x,n,m,alpha,beta,observed,bound,pass
 *
 * with absent parameters left empty and pass in {true,false,inconclusive}.
 * JSON reports are an array of record objects whose final element is a
 * summary object.  Output is deterministic: numbers are printed with
 * shortest round-trip formatting, and the only non-reproducible line (a
 * generation timestamp) can be suppressed.
 */

#include <charconv>
#include <cmath>
#include <ctime>
#include <optional>
#include <ostream>
#include <string>

#include <json.hpp>

#include "errors.hpp"

namespace qbern {

/* Shortest round-trip decimal form, with a ".0" appended to integral values
 * so a double always reads back as a double. */
inline std::string fmt_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    std::string s(buf, res.ptr);
    if (s.find('.') == std::string::npos && s.find('e') == std::string::npos) s += ".0";
    return s;
}

struct CheckRecord {
    enum class Status { pass, fail, inconclusive };

    std::string check_id;
    std::optional<double> q, x;
    std::optional<int> n, m;
    std::optional<double> alpha, beta;
    std::optional<double> observed, bound; // absent on inconclusive rows
    Status status = Status::pass;

    static CheckRecord residual_check(std::string id, double observed, double bound) {
        CheckRecord r;
        r.check_id = std::move(id);
        r.observed = observed;
        r.bound = bound;
        r.status = observed <= bound ? Status::pass : Status::fail;
        return r;
    }

    static CheckRecord margin_check(std::string id, double observed, double bound) {
        CheckRecord r;
        r.check_id = std::move(id);
        r.observed = observed;
        r.bound = bound;
        r.status = observed >= -bound ? Status::pass : Status::fail;
        return r;
    }
};

inline const char* to_string(CheckRecord::Status s) {
    switch (s) {
        case CheckRecord::Status::pass: return "true";
        case CheckRecord::Status::fail: return "false";
        case CheckRecord::Status::inconclusive: return "inconclusive";
    }
    return "?";
}

struct Summary {
    long total = 0;
    long passed = 0;
    long failed = 0;
    long inconclusive = 0;

    void count(const CheckRecord& r) {
        ++total;
        switch (r.status) {
            case CheckRecord::Status::pass: ++passed; break;
            case CheckRecord::Status::fail: ++failed; break;
            case CheckRecord::Status::inconclusive: ++inconclusive; break;
        }
    }
};

inline std::string utc_timestamp() {
    std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

class CsvWriter {
public:
    CsvWriter(std::ostream& os, bool with_timestamp) : os_(os) {
        if (with_timestamp) os_ << "# generated " << utc_timestamp() << "\n";
        os_ << "check_id,q,x,n,m,alpha,beta,observed,bound,pass\n";
    }

    void write(const CheckRecord& r) {
        auto opt_d = [](const std::optional<double>& v) {
            return v ? fmt_double(*v) : std::string();
        };
        auto opt_i = [](const std::optional<int>& v) {
            return v ? std::to_string(*v) : std::string();
        };
        os_ << r.check_id << ',' << opt_d(r.q) << ',' << opt_d(r.x) << ',' << opt_i(r.n) << ','
            << opt_i(r.m) << ',' << opt_d(r.alpha) << ',' << opt_d(r.beta) << ','
            << opt_d(r.observed) << ',' << opt_d(r.bound) << ',' << to_string(r.status) << "\n";
    }

    void finish(const Summary& s) {
        os_ << "# summary total=" << s.total << " passed=" << s.passed
            << " failed=" << s.failed << " inconclusive=" << s.inconclusive << "\n";
    }

private:
    std::ostream& os_;
};

inline nlohmann::json to_json(const CheckRecord& r) {
    nlohmann::json params = nlohmann::json::object();
    if (r.q) params["q"] = *r.q;
    if (r.x) params["x"] = *r.x;
    if (r.n) params["n"] = *r.n;
    if (r.m) params["m"] = *r.m;
    if (r.alpha) params["alpha"] = *r.alpha;
    if (r.beta) params["beta"] = *r.beta;
    nlohmann::json j{{"check_id", r.check_id}, {"params", params}};
    if (r.observed) j["observed"] = *r.observed;
    if (r.bound) j["bound"] = *r.bound;
    if (r.status == CheckRecord::Status::inconclusive) {
        j["pass"] = nullptr;
        j["inconclusive"] = true;
    } else {
        j["pass"] = (r.status == CheckRecord::Status::pass);
    }
    return j;
}

class JsonWriter {
public:
    JsonWriter(std::ostream& os, bool with_timestamp)
        : os_(os), with_timestamp_(with_timestamp) {
        os_ << "[\n";
    }

    void write(const CheckRecord& r) { os_ << "  " << to_json(r).dump() << ",\n"; }

    void finish(const Summary& s) {
        nlohmann::json j{{"summary",
                          {{"total", s.total},
                           {"passed", s.passed},
                           {"failed", s.failed},
                           {"inconclusive", s.inconclusive}}}};
        if (with_timestamp_) j["summary"]["generated"] = utc_timestamp();
        os_ << "  " << j.dump() << "\n]\n";
    }

private:
    std::ostream& os_;
    bool with_timestamp_;
};

} // namespace qbern
