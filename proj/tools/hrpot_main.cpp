#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "hrpot/blockmax.hpp"
#include "hrpot/errors.hpp"
#include "hrpot/estimators.hpp"
#include "hrpot/margins.hpp"
#include "hrpot/numerics.hpp"
#include "hrpot/simulate.hpp"
#include "hrpot/study.hpp"
#include "hrpot/variogram.hpp"
#include "io.hpp"

// Command line tool: simulate | estimate | fit-br | study.
// Exit codes: 0 ok, 2 bad usage or malformed input, 3 I/O failure,
// 4 numerical failure (the message names the error type).

namespace {

using json = nlohmann::ordered_json;
using hrpot::cli::format_double;
using hrpot::cli::parse_number;
using hrpot::cli::UsageError;

const char *error_name(const hrpot::Error &e) {
    if (dynamic_cast<const hrpot::NotPositiveDefinite *>(&e)) return "NotPositiveDefinite";
    if (dynamic_cast<const hrpot::TooFewExceedances *>(&e)) return "TooFewExceedances";
    if (dynamic_cast<const hrpot::DegenerateColumn *>(&e)) return "DegenerateColumn";
    if (dynamic_cast<const hrpot::BlockTooLarge *>(&e)) return "BlockTooLarge";
    if (dynamic_cast<const hrpot::IoError *>(&e)) return "IoError";
    if (dynamic_cast<const hrpot::DomainError *>(&e)) return "DomainError";
    return "Error";
}

hrpot::MarginScale scale_from_name(const std::string &name) {
    if (name == "gumbel") return hrpot::MarginScale::gumbel;
    if (name == "exponential") return hrpot::MarginScale::exponential;
    if (name == "frechet") return hrpot::MarginScale::frechet;
    throw UsageError("--scale: unknown scale: " + name);
}

hrpot::VariogramSpec parse_variogram_flag(const std::string &text) {
    std::vector<double> vals;
    std::string cur;
    auto flush = [&] {
        double v;
        if (!parse_number(cur, v)) throw UsageError("--variogram: not a number: " + cur);
        vals.push_back(v);
        cur.clear();
    };
    for (char ch : text) {
        if (ch == ',') flush();
        else cur += ch;
    }
    flush();
    if (vals.size() != 2 && vals.size() != 4)
        throw UsageError("--variogram: expected alpha,s or alpha,s,beta,c");
    hrpot::VariogramSpec spec;
    spec.alpha = vals[0];
    spec.s = vals[1];
    if (vals.size() == 4) {
        spec.beta = vals[2];
        spec.c = vals[3];
        spec.anisotropic = true;
    }
    try {
        spec.validate();
    } catch (const hrpot::Error &e) {
        throw UsageError(std::string("--variogram: ") + e.what());
    }
    return spec;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
    std::string variogram = "1,1";
    std::string locs;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    std::string scale = "gumbel";
    std::string out;
};

int run_simulate(const SimulateArgs &a) {
    const hrpot::VariogramSpec spec = parse_variogram_flag(a.variogram);
    const hrpot::LocationSet locs = hrpot::cli::read_locations_csv(a.locs);
    if (a.n == 0) throw UsageError("--n must be at least 1");
    if (spec.anisotropic && locs.dim() != 2)
        throw UsageError("--variogram with beta,c needs two-dimensional locations");

    hrpot::BrSampleConfig cfg;
    cfg.locs = locs;
    cfg.spec = spec;
    cfg.n = a.n;
    cfg.seed = a.seed;
    hrpot::BrSample s = hrpot::br_sample(cfg);
    if (s.capped_draws > 0)
        std::cerr << "warning: " << s.capped_draws << " of " << a.n
                  << " draws hit the point cap; upper tails may be truncated\n";

    const hrpot::MarginScale target = scale_from_name(a.scale);
    const hrpot::SampleMatrix data = target == hrpot::MarginScale::gumbel
                                         ? std::move(s.data)
                                         : hrpot::convert_margins(s.data, target);
    hrpot::cli::write_data_csv(a.out, data, locs.labels);
    return 0;
}

// ---------------------------------------------------------------- estimate

struct EstimateArgs {
    std::string data;
    std::string estimator;
    double q = 0.95;
    std::size_t pivot = 0;
    bool pivot_given = false;
    std::size_t block_size = 150;
    std::size_t min_count = 10;
    std::string out;
};

hrpot::ParameterMatrix default_start(std::size_t size) {
    hrpot::ParameterMatrix p(size);
    for (std::size_t i = 0; i < size; ++i)
        for (std::size_t j = i + 1; j < size; ++j) p.set(i, j, 0.5);
    return p;
}

hrpot::ParameterMatrix mv_start(const hrpot::ExceedanceSet &exc) {
    try {
        hrpot::EstimateReport m = hrpot::est_mv_var(exc);
        if (m.lambda) return *m.lambda;
    } catch (const hrpot::Error &) {
    }
    return default_start(exc.components);
}

hrpot::ParameterMatrix spec_start(const hrpot::ExceedanceSet &exc) {
    if (exc.components == 2) {
        try {
            hrpot::EstimateReport m = hrpot::est_spec_biv(exc);
            if (std::isfinite(m.lambda_sq) && m.lambda_sq > 0.0) {
                hrpot::ParameterMatrix p(2);
                p.set(0, 1, m.lambda_sq);
                return p;
            }
        } catch (const hrpot::Error &) {
        }
    }
    return default_start(exc.components);
}

json matrix_json(const hrpot::ParameterMatrix &m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.size(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.size(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

int run_estimate(const EstimateArgs &a) {
    using namespace hrpot;
    const cli::DataTable t = cli::read_data_csv(a.data, MarginScale::exponential);
    ThresholdSpec th;
    th.q = a.q;
    th.min_count = a.min_count;

    const std::string &id = a.estimator;
    std::vector<std::string> notes;
    bool used_pivot = false;
    std::optional<std::size_t> block_used;
    EstimateReport r;

    if (id == "mle1" || id == "var" || id == "mean" || id == "mv-var" || id == "mv-mle") {
        used_pivot = true;
        if (a.pivot >= t.data.components())
            throw UsageError("--pivot " + std::to_string(a.pivot) + " out of range for " +
                             std::to_string(t.data.components()) + " columns");
        ExceedanceSet exc = select_exceedances_component(t.data, a.pivot, th);
        if (id == "mle1") r = est_biv_mle1(exc);
        else if (id == "var") r = est_biv_var(exc);
        else if (id == "mean") r = est_biv_mean(exc);
        else if (id == "mv-var") r = est_mv_var(exc);
        else r = est_mv_mle(exc, mv_start(exc));
    } else if (id == "mle2") {
        r = est_biv_mle2(select_exceedances_union(t.data, th));
    } else if (id == "spec" || id == "spec-mv") {
        SampleMatrix frechet = convert_margins(t.data, MarginScale::frechet);
        notes.push_back("margins converted from exponential to frechet");
        ExceedanceSet exc = select_exceedances_sum(frechet, th);
        if (id == "spec") r = est_spec_biv(exc);
        else r = est_spec_mv(exc, spec_start(exc));
    } else if (id == "mado" || id == "block-ml") {
        SampleMatrix maxima = block_maxima(t.data, a.block_size);
        block_used = a.block_size;
        if (t.data.components() > 2) notes.push_back("block estimator uses columns 0 and 1");
        r = id == "mado" ? est_madogram(maxima, 0, 1) : est_hr_blockml(maxima, 0, 1);
    } else {
        throw UsageError("--estimator: unknown estimator: " + id);
    }
    if (used_pivot && !a.pivot_given) notes.push_back("pivot defaulted to 0");

    // Scalar estimators also mirror their value into a 2x2 matrix; report
    // the matrix form only for the genuinely multivariate family.
    const bool matrix_form = id == "mv-var" || id == "mv-mle" || id == "spec-mv";
    json estimates;
    if (matrix_form && r.lambda) estimates["lambda_sq"] = matrix_json(*r.lambda);
    else estimates["lambda_sq"] = r.lambda_sq;
    if (std::isfinite(r.theta)) estimates["theta"] = r.theta;

    json diags;
    diags["clamped"] = r.clamped;
    diags["dropped"] = r.dropped;
    diags["iterations"] = r.iterations;
    diags["evaluations"] = r.evaluations;
    diags["converged"] = r.converged;
    diags["objective"] = r.objective;
    if (used_pivot) diags["pivot"] = a.pivot;
    if (block_used) diags["block_size"] = *block_used;
    diags["notes"] = notes;

    json out;
    out["estimator"] = id;
    out["N"] = r.count;
    if (block_used) out["q"] = nullptr;
    else out["q"] = r.q;
    out["estimates"] = estimates;
    out["diagnostics"] = diags;
    hrpot::cli::write_text_file(a.out, out.dump(2) + "\n");
    return 0;
}

// ------------------------------------------------------------------ fit-br

struct FitArgs {
    std::string data;
    std::string locs;
    std::string method;
    double q = 0.975;
    std::string anisotropy = "off";
    std::size_t resim = 0;
    std::uint64_t seed = 0;
    std::string out;
};

double max_pairwise_distance(const hrpot::LocationSet &locs) {
    double best = 0.0;
    for (std::size_t i = 0; i < locs.size(); ++i) {
        for (std::size_t j = i + 1; j < locs.size(); ++j) {
            double d2 = 0.0;
            for (std::size_t d = 0; d < locs.dim(); ++d) {
                const double diff = locs.points[i][d] - locs.points[j][d];
                d2 += diff * diff;
            }
            best = std::max(best, std::sqrt(d2));
        }
    }
    return best;
}

int run_fit_br(const FitArgs &a) {
    using namespace hrpot;
    const cli::DataTable t = cli::read_data_csv(a.data, MarginScale::raw);
    const LocationSet locs = cli::read_locations_csv(a.locs);
    const bool aniso = a.anisotropy == "on";
    if (aniso && locs.dim() != 2)
        throw UsageError("--anisotropy on needs two-dimensional locations");
    if (locs.size() != t.data.components())
        throw UsageError("location count (" + std::to_string(locs.size()) +
                         ") does not match data columns (" +
                         std::to_string(t.data.components()) + ")");

    ResimulateConfig rc;
    rc.methods = {a.method};
    rc.anisotropic = aniso;
    rc.q = a.q;
    rc.repetitions = a.resim;
    rc.seed = a.seed;
    const ResimulateResult rr = run_fit_and_resimulate(t.data, locs, rc);
    const ResimulateSummary &sum = rr.summaries.front();
    if (!sum.fitted) throw DomainError(sum.note);
    const VariogramSpec &model = sum.model;

    json out;
    out["method"] = a.method;
    out["q"] = a.q;
    out["anisotropic"] = aniso;
    out["n"] = t.data.n();
    out["components"] = t.data.components();
    json params;
    params["alpha"] = model.alpha;
    params["s"] = model.s;
    if (aniso) {
        params["beta"] = model.beta;
        params["c"] = model.c;
    }
    out["params"] = params;
    if (a.resim > 0) {
        json sd;
        sd["alpha"] = sum.sd_alpha;
        sd["s"] = sum.sd_s;
        if (aniso) {
            sd["beta"] = sum.sd_beta;
            sd["c"] = sum.sd_c;
        }
        json resim;
        resim["repetitions"] = a.resim;
        resim["failures"] = sum.failures;
        resim["sd"] = sd;
        out["resim"] = resim;
    }

    // Extremal coefficient curve for plotting; evaluated along the first
    // coordinate axis, which for an anisotropic model is one slice of it.
    const double dmax = max_pairwise_distance(locs);
    if (locs.dim() == 2) out["ecf_direction"] = std::vector<double>{1.0, 0.0};
    json curve = json::array();
    for (std::size_t i = 0; i < 50; ++i) {
        const double d = dmax * static_cast<double>(i) / 49.0;
        const std::vector<double> h =
            locs.dim() == 2 ? std::vector<double>{d, 0.0} : std::vector<double>{d};
        json pt;
        pt["distance"] = d;
        pt["theta"] = ecf_of_variogram(model, h);
        curve.push_back(pt);
    }
    out["ecf_curve"] = curve;
    hrpot::cli::write_text_file(a.out, out.dump(2) + "\n");
    return 0;
}

// ------------------------------------------------------------------- study

struct StudyArgs {
    std::string config;
    std::string out_dir;
};

[[noreturn]] void bad_config(const std::string &msg) { throw UsageError("config: " + msg); }

void check_keys(const json &obj, std::initializer_list<const char *> allowed,
                const std::string &prefix) {
    for (const auto &el : obj.items()) {
        bool ok = false;
        for (const char *k : allowed)
            if (el.key() == k) {
                ok = true;
                break;
            }
        if (!ok) bad_config("unknown key: " + prefix + el.key());
    }
}

const json &need_key(const json &obj, const char *key) {
    if (!obj.contains(key)) bad_config(std::string("missing key: ") + key);
    return obj.at(key);
}

double cfg_double(const json &v, const std::string &name) {
    if (!v.is_number()) bad_config(name + " must be a number");
    return v.get<double>();
}

std::size_t cfg_size(const json &v, const std::string &name) {
    if (!v.is_number_integer() && !v.is_number_unsigned())
        bad_config(name + " must be a nonnegative integer");
    if (v.is_number_integer() && v.get<long long>() < 0)
        bad_config(name + " must be a nonnegative integer");
    return v.get<std::size_t>();
}

std::vector<double> cfg_double_vec(const json &v, const std::string &name) {
    if (!v.is_array()) bad_config(name + " must be an array of numbers");
    std::vector<double> out;
    for (const auto &el : v) out.push_back(cfg_double(el, name));
    return out;
}

std::vector<std::string> cfg_string_vec(const json &v, const std::string &name) {
    if (!v.is_array()) bad_config(name + " must be an array of strings");
    std::vector<std::string> out;
    for (const auto &el : v) {
        if (!el.is_string()) bad_config(name + " must be an array of strings");
        out.push_back(el.get<std::string>());
    }
    return out;
}

int run_study(const StudyArgs &a) {
    using namespace hrpot;
    json cfg;
    try {
        cfg = json::parse(cli::read_text_file(a.config));
    } catch (const nlohmann::json::parse_error &e) {
        bad_config(e.what());
    }
    if (!cfg.is_object()) bad_config("top level must be an object");
    check_keys(cfg, {"schema", "seed", "bivariate", "parametric", "outputs"}, "");
    if (cfg_size(need_key(cfg, "schema"), "schema") != 1) bad_config("schema must be 1");
    const std::uint64_t seed = need_key(cfg, "seed").get<std::uint64_t>();
    const bool has_biv = cfg.contains("bivariate");
    const bool has_par = cfg.contains("parametric");
    if (!has_biv && !has_par) bad_config("missing key: bivariate or parametric");

    std::error_code ec;
    std::filesystem::create_directories(a.out_dir, ec);
    if (ec) throw IoError("cannot create " + a.out_dir + ": " + ec.message());
    const std::filesystem::path dir(a.out_dir);

    json echo;
    echo["schema"] = 1;
    echo["seed"] = seed;
    std::vector<std::string> outputs;

    if (has_biv) {
        const json &b = cfg.at("bivariate");
        if (!b.is_object()) bad_config("bivariate must be an object");
        check_keys(b, {"lambda_grid", "n_grid", "q_per_n", "block_size", "repetitions",
                       "estimators"},
                   "bivariate.");
        StudyConfig sc;
        sc.seed = RngStream(seed).child(0).seed();
        if (b.contains("lambda_grid"))
            sc.lambda_grid = cfg_double_vec(b.at("lambda_grid"), "bivariate.lambda_grid");
        if (b.contains("n_grid")) {
            sc.n_grid.clear();
            const json &g = b.at("n_grid");
            if (!g.is_array()) bad_config("bivariate.n_grid must be an array");
            for (const auto &el : g) sc.n_grid.push_back(cfg_size(el, "bivariate.n_grid"));
        }
        if (b.contains("q_per_n")) {
            const json &qm = b.at("q_per_n");
            if (!qm.is_object()) bad_config("bivariate.q_per_n must be an object");
            sc.q_per_n.clear();
            for (const auto &el : qm.items()) {
                char *end = nullptr;
                const unsigned long long n = std::strtoull(el.key().c_str(), &end, 10);
                if (el.key().empty() || *end != '\0')
                    bad_config("q_per_n keys must be sample sizes, got: " + el.key());
                sc.q_per_n[static_cast<std::size_t>(n)] =
                    cfg_double(el.value(), "bivariate.q_per_n." + el.key());
            }
        }
        if (b.contains("block_size"))
            sc.block_size = cfg_size(b.at("block_size"), "bivariate.block_size");
        if (b.contains("repetitions"))
            sc.repetitions = cfg_size(b.at("repetitions"), "bivariate.repetitions");
        if (b.contains("estimators"))
            sc.estimators = cfg_string_vec(b.at("estimators"), "bivariate.estimators");
        try {
            sc.validate();
        } catch (const Error &e) {
            bad_config(e.what());
        }

        const BivariateStudyResult res = run_bivariate_study(sc);
        std::string csv = "lambda_sq_true,n,q,estimator,rep,lambda_sq_hat,theta_hat\n";
        for (const auto &row : res.rows) {
            csv += format_double(row.lambda_sq_true);
            csv += ',' + std::to_string(row.n);
            csv += ',' + std::string(format_double(row.q));
            csv += ',' + row.estimator;
            csv += ',' + std::to_string(row.repetition);
            csv += ',' + std::string(format_double(row.lambda_sq_hat));
            csv += ',' + std::string(format_double(row.theta_hat));
            csv += '\n';
        }
        cli::write_text_file((dir / "bivariate.csv").string(), csv);
        outputs.push_back("bivariate.csv");

        json eb;
        eb["lambda_grid"] = sc.lambda_grid;
        eb["n_grid"] = sc.n_grid;
        json qmap;
        for (const auto &[n, qv] : sc.q_per_n) qmap[std::to_string(n)] = qv;
        eb["q_per_n"] = qmap;
        eb["block_size"] = sc.block_size;
        eb["repetitions"] = sc.repetitions;
        eb["estimators"] = sc.estimators;
        echo["bivariate"] = eb;
    }

    if (has_par) {
        const json &p = cfg.at("parametric");
        if (!p.is_object()) bad_config("parametric must be an object");
        check_keys(p, {"locations", "truth", "anisotropic", "n", "q", "repetitions", "methods",
                       "curve_distances"},
                   "parametric.");
        ParametricStudyConfig pc;
        pc.seed = RngStream(seed).child(1).seed();
        if (p.contains("locations")) {
            const json &L = p.at("locations");
            if (!L.is_array() || L.empty())
                bad_config("parametric.locations must be a non-empty array");
            for (const auto &pt : L) {
                if (!pt.is_array() || pt.empty() || pt.size() > 2)
                    bad_config("parametric.locations entries must be [x] or [x,y]");
                std::vector<double> v;
                for (const auto &c : pt) v.push_back(cfg_double(c, "parametric.locations"));
                pc.locs.points.push_back(std::move(v));
            }
        }
        if (p.contains("truth")) {
            const json &tj = p.at("truth");
            if (!tj.is_object()) bad_config("parametric.truth must be an object");
            check_keys(tj, {"alpha", "s", "beta", "c"}, "parametric.truth.");
            if (tj.contains("alpha")) pc.truth.alpha = cfg_double(tj.at("alpha"), "truth.alpha");
            if (tj.contains("s")) pc.truth.s = cfg_double(tj.at("s"), "truth.s");
            pc.truth.anisotropic = tj.contains("beta") || tj.contains("c");
            if (tj.contains("beta")) pc.truth.beta = cfg_double(tj.at("beta"), "truth.beta");
            if (tj.contains("c")) pc.truth.c = cfg_double(tj.at("c"), "truth.c");
        }
        if (p.contains("anisotropic")) {
            if (!p.at("anisotropic").is_boolean()) bad_config("parametric.anisotropic must be a bool");
            pc.anisotropic = p.at("anisotropic").get<bool>();
        }
        if (p.contains("n")) pc.n = cfg_size(p.at("n"), "parametric.n");
        if (p.contains("q")) pc.q = cfg_double(p.at("q"), "parametric.q");
        if (p.contains("repetitions"))
            pc.repetitions = cfg_size(p.at("repetitions"), "parametric.repetitions");
        if (p.contains("methods")) pc.methods = cfg_string_vec(p.at("methods"), "parametric.methods");
        if (p.contains("curve_distances"))
            pc.curve_distances = cfg_double_vec(p.at("curve_distances"), "parametric.curve_distances");
        try {
            pc.validate();
        } catch (const Error &e) {
            bad_config(e.what());
        }

        const ParametricStudyResult res = run_parametric_study(pc);
        std::string csv = pc.anisotropic ? "estimator,rep,alpha_hat,s_hat,beta_hat,c_hat\n"
                                         : "estimator,rep,alpha_hat,s_hat\n";
        for (const auto &row : res.rows) {
            csv += row.method;
            csv += ',' + std::to_string(row.repetition);
            csv += ',' + std::string(format_double(row.alpha_hat));
            csv += ',' + std::string(format_double(row.s_hat));
            if (pc.anisotropic) {
                csv += ',' + std::string(format_double(row.beta_hat));
                csv += ',' + std::string(format_double(row.c_hat));
            }
            csv += '\n';
        }
        cli::write_text_file((dir / "parametric.csv").string(), csv);
        outputs.push_back("parametric.csv");

        if (!res.curve.empty()) {
            std::string ccsv = "estimator,which,distance,theta\n";
            for (const auto &pt : res.curve) {
                ccsv += pt.method;
                ccsv += ',' + pt.which;
                ccsv += ',' + std::string(format_double(pt.distance));
                ccsv += ',' + std::string(format_double(pt.theta));
                ccsv += '\n';
            }
            cli::write_text_file((dir / "parametric_curve.csv").string(), ccsv);
            outputs.push_back("parametric_curve.csv");
        }

        json ep;
        json locs_json = json::array();
        const LocationSet resolved = pc.resolved_locs();
        for (const auto &pt : resolved.points) locs_json.push_back(pt);
        ep["locations"] = locs_json;
        json truth;
        truth["alpha"] = pc.truth.alpha;
        truth["s"] = pc.truth.s;
        if (pc.truth.anisotropic) {
            truth["beta"] = pc.truth.beta;
            truth["c"] = pc.truth.c;
        }
        ep["truth"] = truth;
        ep["anisotropic"] = pc.anisotropic;
        ep["n"] = pc.n;
        ep["q"] = pc.q;
        ep["repetitions"] = pc.repetitions;
        ep["methods"] = pc.methods;
        ep["curve_distances"] = pc.resolved_curve();
        echo["parametric"] = ep;
    }

    echo["outputs"] = outputs;
    cli::write_text_file((dir / "manifest.json").string(), echo.dump(2) + "\n");
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Peaks-over-threshold inference for Brown-Resnick models"};
    app.require_subcommand(1);

    SimulateArgs sa;
    CLI::App *sim = app.add_subcommand("simulate", "Draw from a Brown-Resnick process");
    sim->add_option("--variogram", sa.variogram, "alpha,s or alpha,s,beta,c")
        ->capture_default_str();
    sim->add_option("--locs", sa.locs, "locations CSV (label,x[,y])")->required();
    sim->add_option("--n", sa.n, "number of draws")->required();
    sim->add_option("--seed", sa.seed, "rng seed")->capture_default_str();
    sim->add_option("--scale", sa.scale, "output margins")
        ->check(CLI::IsMember({"gumbel", "exponential", "frechet"}))
        ->capture_default_str();
    sim->add_option("--out", sa.out, "output CSV")->required();

    EstimateArgs ea;
    CLI::App *est = app.add_subcommand("estimate", "Dependence estimate from exponential-scale data");
    est->add_option("--data", ea.data, "data CSV with header, exponential margins")->required();
    est->add_option("--estimator", ea.estimator, "estimator id")
        ->check(CLI::IsMember({"mle1", "mle2", "var", "mean", "mv-var", "mv-mle", "spec",
                               "spec-mv", "mado", "block-ml"}))
        ->required();
    est->add_option("--q", ea.q, "threshold quantile")->capture_default_str();
    est->add_option("--pivot", ea.pivot, "pivot component")->capture_default_str();
    est->add_option("--block-size", ea.block_size, "block length for block estimators")
        ->capture_default_str();
    est->add_option("--min-count", ea.min_count, "minimum exceedance count")
        ->capture_default_str();
    est->add_option("--out", ea.out, "output JSON")->required();

    FitArgs fa;
    CLI::App *fit = app.add_subcommand("fit-br", "Fit a Brown-Resnick variogram to data");
    fit->add_option("--data", fa.data, "data CSV with header, raw margins")->required();
    fit->add_option("--locs", fa.locs, "locations CSV (label,x[,y])")->required();
    fit->add_option("--method", fa.method, "fit method")
        ->check(CLI::IsMember({"proj-ls", "spec-ml", "spec-cl"}))
        ->required();
    fit->add_option("--q", fa.q, "threshold quantile")->capture_default_str();
    fit->add_option("--anisotropy", fa.anisotropy, "fit the planar anisotropic family")
        ->check(CLI::IsMember({"on", "off"}))
        ->capture_default_str();
    fit->add_option("--resim", fa.resim, "resimulation refits for parameter SDs")
        ->capture_default_str();
    fit->add_option("--seed", fa.seed, "rng seed for resimulation")->capture_default_str();
    fit->add_option("--out", fa.out, "output JSON")->required();

    StudyArgs ta;
    CLI::App *study = app.add_subcommand("study", "Run a simulation study from a JSON config");
    study->add_option("--config", ta.config, "study config JSON")->required();
    study->add_option("--out-dir", ta.out_dir, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return 2;
    }
    ea.pivot_given = est->count("--pivot") > 0;

    try {
        if (sim->parsed()) return run_simulate(sa);
        if (est->parsed()) return run_estimate(ea);
        if (fit->parsed()) return run_fit_br(fa);
        return run_study(ta);
    } catch (const UsageError &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const hrpot::IoError &e) {
        std::cerr << "io error: " << e.what() << '\n';
        return 3;
    } catch (const hrpot::Error &e) {
        std::cerr << "numerical failure (" << error_name(e) << "): " << e.what() << '\n';
        return 4;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    }
}
