/* qbern: evaluate q-calculus quantities, run the identity / inequality
 * verification suites, estimate the q-hat threshold, and sweep grids into
 * CSV or JSON reports.
 *
 * Exit codes: 0 all checks pass, 1 at least one certified failure,
 * 2 usage / configuration / domain error.
 */

#include <CLI11.hpp>

#include <qbern/qbern.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

using namespace qbern;

namespace {

struct CommonOpts {
    double tol = 1e-10;
    double eps_tail = 1e-14;
    long max_terms = 100000;
    std::uint64_t seed = 42;
    std::string format = "csv";
    std::string out;
    bool no_timestamp = false;

    TruncationPolicy policy() const {
        TruncationPolicy pol{eps_tail, max_terms};
        pol.validate();
        if (!(tol > 0.0)) throw DomainError("--tol must be > 0");
        return pol;
    }
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--tol", o.tol, "Residual tolerance scale (default 1e-10)");
    cmd->add_option("--eps-tail", o.eps_tail,
                    "Certified relative tail target for truncated products/series");
    cmd->add_option("--max-terms", o.max_terms, "Hard term cap per truncated product/series");
    cmd->add_option("--seed", o.seed, "Seed for the sampled checks");
    cmd->add_option("--format", o.format, "Report format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--out", o.out, "Write output to PATH instead of standard output");
    cmd->add_flag("--no-timestamp", o.no_timestamp,
                  "Suppress the generation-time line so reports are byte-reproducible");
}

/* Stream target: --out PATH or stdout. */
struct Output {
    std::ofstream file;
    std::ostream* os = &std::cout;

    explicit Output(const std::string& path) {
        if (!path.empty()) {
            file.open(path);
            if (!file) throw DomainError("cannot open --out path: " + path);
            os = &file;
        }
    }
};

/* CSV or JSON report writer plus running summary, behind one interface. */
class Report {
public:
    Report(std::ostream& os, const std::string& format, bool with_timestamp) {
        if (format == "json")
            json_.emplace(os, with_timestamp);
        else
            csv_.emplace(os, with_timestamp);
    }

    void write(const CheckRecord& r) {
        summary_.count(r);
        if (csv_)
            csv_->write(r);
        else
            json_->write(r);
    }

    void finish() {
        if (csv_)
            csv_->finish(summary_);
        else
            json_->finish(summary_);
    }

    const Summary& summary() const { return summary_; }

private:
    std::optional<CsvWriter> csv_;
    std::optional<JsonWriter> json_;
    Summary summary_;
};

/* ---------------------------------------------------------------- eval -- */

struct EvalOpts {
    std::string quantity;
    std::optional<double> q, x, alpha, beta, a;
    std::optional<int> n, m;
};

double need(const std::optional<double>& v, const char* flag, const std::string& quantity) {
    if (!v) throw DomainError("eval " + quantity + ": missing required flag " + flag);
    return *v;
}

int need_int(const std::optional<int>& v, const char* flag, const std::string& quantity) {
    if (!v) throw DomainError("eval " + quantity + ": missing required flag " + flag);
    return *v;
}

void print_scalar(std::ostream& os, const CommonOpts& o, const std::string& quantity,
                  double value) {
    if (o.format == "json") {
        nlohmann::json j{{"quantity", quantity}, {"value", value}};
        os << j.dump() << "\n";
    } else {
        os << fmt_double(value) << "\n";
    }
}

void print_tail_bounded(std::ostream& os, const CommonOpts& o, const std::string& quantity,
                        const TailBoundedValue& v) {
    if (o.format == "json") {
        nlohmann::json j{{"quantity", quantity},
                         {"value", v.value},
                         {"tail_bound", v.tail_bound},
                         {"terms_used", v.terms_used}};
        os << j.dump() << "\n";
    } else {
        os << fmt_double(v.value) << "\n";
        os << "tail_bound " << fmt_double(v.tail_bound) << "\n";
    }
}

void print_series(std::ostream& os, const CommonOpts& o, const std::string& quantity,
                  const SeriesValue& v) {
    if (o.format == "json") {
        nlohmann::json j{{"quantity", quantity},
                         {"value", v.value},
                         {"last_term_ratio", v.last_term_ratio},
                         {"terms_used", v.terms_used}};
        os << j.dump() << "\n";
    } else {
        os << fmt_double(v.value) << "\n";
    }
}

int run_eval(const CommonOpts& common, const EvalOpts& e) {
    Output target(common.out);
    std::ostream& os = *target.os;
    const TruncationPolicy pol = common.policy();
    const std::string& what = e.quantity;
    const QParams p(need(e.q, "--q", what));

    if (what == "qnum") {
        print_scalar(os, common, what, q_number(need(e.alpha, "--alpha", what), p));
    } else if (what == "qfact") {
        print_scalar(os, common, what, q_factorial(need_int(e.n, "--n", what), p));
    } else if (what == "qbinom") {
        print_scalar(os, common, what,
                     q_binomial(need_int(e.n, "--n", what), need_int(e.m, "--m", what), p));
    } else if (what == "poch") {
        const double x = need(e.x, "--x", what);
        const double a = need(e.a, "--a", what);
        const int n = need_int(e.n, "--n", what);
        const double v = n >= 0 ? pochhammer_fin(x, a, n, p) : pochhammer_neg(x, a, -n, p);
        print_scalar(os, common, what, v);
    } else if (what == "poch-inf") {
        print_tail_bounded(os, common, what, one_plus_inf(need(e.x, "--x", what), p, pol));
    } else if (what == "poch-real") {
        print_tail_bounded(
            os, common, what,
            one_plus_real(need(e.x, "--x", what), need(e.alpha, "--alpha", what), p, pol));
    } else if (what == "eq11") {
        // residual of the alternating-exponent series expansion against the
        // infinite product at (x, q)
        const double x = need(e.x, "--x", what);
        const double res =
            rel_residual(euler_series_E(x, p, pol).value, one_plus_inf(x, p, pol).value);
        print_scalar(os, common, what, res);
    } else if (what == "eq12") {
        // residual of the plain-power series expansion against the
        // reciprocal infinite product at (x, q), |x| < 1
        const double x = need(e.x, "--x", what);
        const double res = rel_residual(euler_series_e(x, p, pol).value,
                                        1.0 / one_plus_inf(-x, p, pol).value);
        print_scalar(os, common, what, res);
    } else if (what == "e_q") {
        print_series(os, common, what, e_q(need(e.x, "--x", what), p, pol));
    } else if (what == "E_q") {
        print_series(os, common, what, E_q(need(e.x, "--x", what), p, pol));
    } else if (what == "dq") {
        // Jackson derivative of the monomial t^n at x
        const double x = need(e.x, "--x", what);
        const int n = need_int(e.n, "--n", what);
        if (n < 0) throw DomainError("eval dq: need --n >= 0");
        RealFunction f{[n](double t) { return std::pow(t, n); }};
        print_scalar(os, common, what, q_derivative(f, x, p));
    } else {
        throw DomainError("eval: unknown quantity '" + what + "'");
    }
    return 0;
}

/* -------------------------------------------------------------- verify -- */

int run_verify_identities(const CommonOpts& common, int exact_gauss_max) {
    Output target(common.out);
    VerifyConfig cfg;
    cfg.tol = common.tol;
    cfg.policy = common.policy();
    cfg.seed = common.seed;
    cfg.exact_gauss_max = exact_gauss_max;

    Report report(*target.os, common.format, !common.no_timestamp);
    run_identity_checks(cfg, [&](const CheckRecord& r) { report.write(r); });
    report.finish();
    return report.summary().failed > 0 ? 1 : 0;
}

struct GridFlags {
    GridOverrides ov;

    void add(CLI::App* cmd) {
        cmd->add_option("--x-min", ov.x_min, "Override: lowest x of the sweep grid");
        cmd->add_option("--x-max", ov.x_max, "Override: highest x of the sweep grid");
        cmd->add_option("--x-count", ov.x_count, "Override: x-grid point count (default 11)");
        cmd->add_option("--q-min", ov.q_min, "Override: lowest q of the sweep grid");
        cmd->add_option("--q-max", ov.q_max, "Override: highest q of the sweep grid");
        cmd->add_option("--q-step", ov.q_step, "Override: q-grid step");
        cmd->add_option("--n-min", ov.n_min, "Override: lowest integer exponent");
        cmd->add_option("--n-max", ov.n_max, "Override: highest integer exponent");
        cmd->add_option("--alpha", ov.alpha, "Override: single alpha instead of the grid");
        cmd->add_option("--beta", ov.beta, "Override: single beta instead of the grid");
        cmd->add_option("--m", ov.m, "Override: single m instead of the grid");
        cmd->add_option("--qhat-step", ov.qhat_step, "q-hat annotation grid step");
        cmd->add_option("--qhat-q-lo", ov.qhat_q_lo, "q-hat annotation scan lower end");
        cmd->add_option("--qhat-q-hi", ov.qhat_q_hi, "q-hat annotation scan upper end");
    }
};

FormTag parse_form_or_throw(const std::string& s) {
    const auto tag = parse_form_tag(s);
    if (!tag)
        throw DomainError("unknown --form '" + s +
                          "' (expected one of thm1 rem2 cor1 thm2 prop1 cor6 cor_final "
                          "exp_E exp_e)");
    return *tag;
}

int run_verify_inequalities(const CommonOpts& common, const std::vector<std::string>& forms,
                            const GridOverrides& ov) {
    if (forms.empty()) throw DomainError("verify inequalities: need at least one --forms tag");
    std::vector<FormTag> tags;
    tags.reserve(forms.size());
    for (const auto& s : forms) tags.push_back(parse_form_or_throw(s));

    Output target(common.out);
    VerifyConfig cfg;
    cfg.tol = common.tol;
    cfg.policy = common.policy();
    cfg.seed = common.seed;

    Report report(*target.os, common.format, !common.no_timestamp);
    long fatal = 0;
    for (FormTag tag : tags)
        fatal += run_inequality_checks(tag, cfg, ov,
                                       [&](const CheckRecord& r) { report.write(r); });
    report.finish();
    return fatal > 0 ? 1 : 0;
}

/* ---------------------------------------------------------------- qhat -- */

int run_qhat(const CommonOpts& common, const std::string& form, double x, double alpha,
             double beta, double grid_step, double q_lo, double q_hi) {
    const FormTag tag = parse_form_or_throw(form);
    switch (tag) {
        case FormTag::thm2:
        case FormTag::prop1:
        case FormTag::cor6:
        case FormTag::cor_final:
        case FormTag::exp_E:
        case FormTag::exp_e: break;
        default:
            throw DomainError("qhat: form '" + form +
                              "' has no real exponent; use one of thm2 prop1 cor6 "
                              "cor_final exp_E exp_e");
    }
    IneqForm f;
    f.tag = tag;
    f.alpha = alpha;
    f.beta = beta;

    Output target(common.out);
    std::ostream& os = *target.os;
    const QhatEstimate est = qhat_estimate(f, x, grid_step, q_lo, q_hi, common.policy());

    if (common.format == "json") {
        nlohmann::json j{{"form", form},
                         {"x", x},
                         {"alpha", alpha},
                         {"beta", beta},
                         {"qhat", est.qhat},
                         {"grid_step", est.grid_step},
                         {"held_on_all_grid", est.held_on_all_grid},
                         {"inconclusive_points", est.inconclusive.size()}};
        if (est.witness_below) {
            j["witness_below"] = {{"q", est.witness_below->first},
                                  {"margin", est.witness_below->second.value},
                                  {"err", est.witness_below->second.err}};
        } else {
            j["witness_below"] = nullptr;
        }
        os << j.dump() << "\n";
    } else {
        os << "qhat " << fmt_double(est.qhat) << "\n";
        os << "grid_step " << fmt_double(est.grid_step) << "\n";
        os << "held_on_all_grid " << (est.held_on_all_grid ? "true" : "false") << "\n";
        if (est.witness_below)
            os << "witness_below q=" << fmt_double(est.witness_below->first)
               << " margin=" << fmt_double(est.witness_below->second.value)
               << " err=" << fmt_double(est.witness_below->second.err) << "\n";
        os << "inconclusive_points " << est.inconclusive.size() << "\n";
    }
    return 0;
}

/* --------------------------------------------------------------- sweep -- */

int run_sweep(const CommonOpts& common, const std::string& form, GridOverrides ov) {
    const FormTag tag = parse_form_or_throw(form);
    // The plain sweep defaults to the compact q-grid; explicit flags win.
    if (!ov.q_min && !ov.q_max && !ov.q_step) {
        ov.q_min = 0.1;
        ov.q_max = 0.9;
        ov.q_step = 0.1;
    }

    Output target(common.out);
    VerifyConfig cfg;
    cfg.tol = common.tol;
    cfg.policy = common.policy();
    cfg.seed = common.seed;

    Report report(*target.os, common.format, !common.no_timestamp);
    SweepOptions opts;
    opts.qhat_annotations = false;
    opts.min_margin_row = false;
    const long fatal =
        run_inequality_checks(tag, cfg, ov, [&](const CheckRecord& r) { report.write(r); }, opts);
    report.finish();
    return fatal > 0 ? 1 : 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"q-calculus evaluator and q-Bernoulli inequality verifier"};
    app.require_subcommand(1);

    // eval
    auto* eval = app.add_subcommand("eval", "Evaluate one quantity at one point");
    CommonOpts eval_common;
    EvalOpts eval_opts;
    eval->add_option("quantity", eval_opts.quantity,
                     "One of: qnum qfact qbinom poch poch-inf poch-real eq11 eq12 e_q E_q dq")
        ->required();
    eval->add_option("--q", eval_opts.q, "Base q in (0, 1)");
    eval->add_option("--x", eval_opts.x, "Point x");
    eval->add_option("--alpha", eval_opts.alpha, "Real exponent alpha");
    eval->add_option("--beta", eval_opts.beta, "Real exponent beta");
    eval->add_option("--a", eval_opts.a, "Shift a of the shifted factorial");
    eval->add_option("--n", eval_opts.n, "Integer order n");
    eval->add_option("--m", eval_opts.m, "Integer order m");
    add_common(eval, eval_common);

    // verify {identities, inequalities}
    auto* verify = app.add_subcommand("verify", "Run a verification suite");
    verify->require_subcommand(1);

    auto* vid = verify->add_subcommand("identities", "Exact, series, product and "
                                                     "derivative identity checks");
    CommonOpts vid_common;
    int exact_gauss_max = 25;
    vid->add_option("--exact-gauss-max", exact_gauss_max,
                    "Highest degree of the exact q-binomial theorem check");
    add_common(vid, vid_common);

    auto* vin = verify->add_subcommand("inequalities", "Inequality sweeps over the "
                                                       "documented grids");
    CommonOpts vin_common;
    std::vector<std::string> forms;
    vin->add_option("--forms", forms, "Inequality form tags to sweep (comma or space separated)")
        ->required()
        ->delimiter(',');
    GridFlags vin_grid;
    vin_grid.add(vin);
    add_common(vin, vin_common);

    // qhat
    auto* qh = app.add_subcommand("qhat", "Estimate the q-hat threshold for one form at one x");
    CommonOpts qh_common;
    std::string qh_form;
    double qh_x = 0.0, qh_alpha = 1.0, qh_beta = 0.0;
    double qh_step = 1e-3, qh_lo = 0.01, qh_hi = 0.999;
    qh->add_option("--form", qh_form, "Real-exponent form tag")->required();
    qh->add_option("--x", qh_x, "Point x")->required();
    qh->add_option("--alpha", qh_alpha, "Real exponent alpha");
    qh->add_option("--beta", qh_beta, "Real exponent beta");
    qh->add_option("--grid-step", qh_step, "Scan grid step (<= 0.01)");
    qh->add_option("--q-lo", qh_lo, "Scan lower end");
    qh->add_option("--q-hi", qh_hi, "Scan upper end");
    add_common(qh, qh_common);

    // sweep
    auto* sw = app.add_subcommand("sweep", "Emit one form's margin grid as a plain table");
    CommonOpts sw_common;
    std::string sw_form;
    sw->add_option("--form", sw_form, "Inequality form tag")->required();
    GridFlags sw_grid;
    sw_grid.add(sw);
    add_common(sw, sw_common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (eval->parsed()) return run_eval(eval_common, eval_opts);
        if (vid->parsed()) return run_verify_identities(vid_common, exact_gauss_max);
        if (vin->parsed()) return run_verify_inequalities(vin_common, forms, vin_grid.ov);
        if (qh->parsed())
            return run_qhat(qh_common, qh_form, qh_x, qh_alpha, qh_beta, qh_step, qh_lo, qh_hi);
        if (sw->parsed()) return run_sweep(sw_common, sw_form, sw_grid.ov);
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2; // no subcommand matched; unreachable with require_subcommand(1)
}
