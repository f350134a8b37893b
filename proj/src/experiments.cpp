#include "lab/experiments.hpp"

#include "lab/agmon.hpp"
#include "lab/carleman.hpp"
#include "lab/constants.hpp"
#include "lab/diskmodes.hpp"
#include "lab/geometry.hpp"
#include "lab/heatpos.hpp"
#include "lab/io.hpp"
#include "lab/modes1d.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

namespace fs = std::filesystem;

namespace lab {

namespace {

constexpr double pi = std::numbers::pi;

const Json& defaults(const std::string& tag)
{
    static const Json table = {
        {"sphere-exact",
         {{"k", {5, 10, 20, 40}},
          {"radii", {0.3, 0.6, 1.2}},
          {"grid", 16000},
          {"eig_grid", 4000},
          {"eig_k_max", 20},
          {"eig_tol", 1e-3}}},
        {"revolve-decay",
         {{"profile", "sphere"},
          {"profile_params", Json::object()},
          {"profile_csv", ""},
          {"k_lo", 1},
          {"k_hi", 40},
          {"grid", 16000},
          {"radii", {0.3, 0.6}},
          {"rel_tol", 0.05},
          {"blowup_j", {2, 3, 4, 5}},
          {"blowup_band", {0.8, 1.2}},
          {"agmon_points", 200}}},
        {"disk-decay",
         {{"n_lo", 5},
          {"n_hi", 60},
          {"r", 0.5},
          {"beta", 0.5},
          {"sixth_term", true},
          {"rel_tol", 0.1},
          {"alphas", {0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0, 2.25, 2.5, 2.75, 3.0}},
          {"recurrence_tol", 1e-8}}},
        {"loc-constants",
         {{"geometry", "interval"},
          {"a", {0.3, 0.5, 0.7}},
          {"sigma_modes", 60},
          {"heat_modes", 200},
          {"N", {4, 6, 8, 10, 12, 14, 16, 18, 20, 22, 24, 26, 28, 30, 32, 34, 36, 38, 40}},
          {"radii", {0.3, 0.6}},
          {"k_max", 45},
          {"lambda_max", 2100.0},
          {"grid", 3000},
          {"k_sweep", {4, 40, 3}},
          {"times", {0.02, 0.2, 1.3}},
          {"cap_factor", 40.0},
          {"algebra", false},
          {"algebra_samples", 1000}}},
        {"small-ball",
         {{"modes", 16},
          {"x0", 0.5},
          {"radii", {0.0125, 0.025, 0.05, 0.1}},
          {"N", {4, 5, 6, 7, 8}},
          {"r2_min", 0.95}}},
        {"carleman",
         {{"conj_n_1d", {201, 401, 801}},
          {"conj_n_2d", {129, 257, 513}},
          {"conj_tau", 3.0},
          {"conj_band", {3.5, 4.5}},
          {"n_1d", 4001},
          {"n_2d", 257},
          {"lambda_1d", 1.0},
          {"lambda_2d", 4.0},
          {"lambda_bracket", {0.1, 8.0}},
          {"bumps", 100},
          {"directions", 8},
          {"metrics", 20},
          {"amplitude", 0.03},
          {"bumps_per_metric", 2}}},
        {"heatpos",
         {{"cells", 400},
          {"dt", 1e-4},
          {"bump_center", 0.9},
          {"bump_width", 0.03},
          {"omega", {0.0, 0.2}},
          {"z0", 0.5},
          {"times", {0.05, 0.1}},
          {"eps", 0.1},
          {"eta", -1.0},
          {"D", 1.0},
          {"sweep_halvings", 10},
          {"li_yau_trials", 1000},
          {"alpha_range", {1.1, 3.0}},
          {"mass_tol", 1e-10}}},
    };
    auto it = table.find(tag);
    if (it == table.end())
        throw ConfigError("unknown experiment '" + tag + "'\n" + catalog_text());
    return *it;
}

bool same_kind(const Json& def, const Json& v)
{
    if (def.is_boolean())
        return v.is_boolean();
    if (def.is_string())
        return v.is_string();
    if (def.is_object())
        return v.is_object();
    if (def.is_number_integer())
        return v.is_number() && !v.is_boolean() && std::floor(v.get<double>()) == v.get<double>();
    if (def.is_number())
        return v.is_number() && !v.is_boolean();
    return false;
}

std::vector<double> nums(const Json& c, const char* key)
{
    return c.at(key).get<std::vector<double>>();
}

std::vector<int> ints(const Json& c, const char* key)
{
    std::vector<int> out;
    for (const Json& v : c.at(key))
        out.push_back(static_cast<int>(v.get<double>()));
    return out;
}

int integer(const Json& c, const char* key)
{
    return static_cast<int>(c.at(key).get<double>());
}

void require(bool ok, const std::string& msg)
{
    if (!ok)
        throw ConfigError(msg);
}

std::vector<double> positive(const Json& c, const char* key)
{
    std::vector<double> v = nums(c, key);
    for (double x : v)
        require(x > 0.0, std::string(key) + ": entries must be positive");
    return v;
}

struct Out {
    std::string dir;
    ExperimentOutput result;
    CsvWriter csv(const std::string& name, const std::vector<std::string>& header)
    {
        result.files.push_back(name);
        return CsvWriter((fs::path(dir) / name).string(), header);
    }
};

const char* flag(bool b) { return b ? "1" : "0"; }

// ---------------------------------------------------------------------------

void run_sphere_exact(const Json& c, Out& out)
{
    std::vector<int> ks = ints(c, "k");
    std::vector<double> radii = positive(c, "radii");
    const int grid = integer(c, "grid");
    require(grid >= 200, "grid: need at least 200 nodes");
    for (int k : ks)
        require(k >= 1, "k: entries must be >= 1");
    RevolutionProfile p = make_profile("sphere");
    EquatorData eq = equator_data(p);

    bool pass = true;
    {
        CsvWriter t = out.csv("sphere_exact.csv",
                              {"k", "r", "quadrature", "exact", "remainder_bound", "pass"});
        int fails = 0;
        for (int k : ks) {
            ModeFamily fam = solve_reduced(p, k, 0, grid);
            const Mode& m = fam.get(k, 0);
            for (double r : radii) {
                double q = ball_norm_sq(m, r);
                SphereNorm ex = sphere_exact_norm(k, r);
                bool ok = std::abs(q - ex.value) <= ex.value * ex.remainder_bound;
                fails += !ok;
                t.row_mixed({std::to_string(k), format_double(r), format_double(q),
                             format_double(ex.value), format_double(ex.remainder_bound), flag(ok)});
            }
        }
        out.result.report["exact_failures"] = fails;
        pass = pass && fails == 0;
    }
    {
        const int kmax = integer(c, "eig_k_max");
        const double tol = c.at("eig_tol").get<double>();
        CsvWriter t = out.csv("sphere_eigen.csv", {"k", "lambda", "exact", "rel_err",
                                                   "harmonic_prediction", "pass"});
        const int eig_grid = integer(c, "eig_grid");
        require(eig_grid >= 200, "eig_grid: need at least 200 nodes");
        ModeFamily fam = solve_family(p, 1, kmax, 0, eig_grid);
        double worst = 0.0, worst_pred = 0.0;
        for (int k = 1; k <= kmax; ++k) {
            double lam = fam.get(k, 0).lambda, ex = k * (k + 1.0);
            double pred = harmonic_prediction(eq, k);
            double rel = std::abs(lam - ex) / ex;
            worst = std::max(worst, rel);
            worst_pred = std::max(worst_pred, std::abs(pred - ex) / ex);
            t.row_mixed({std::to_string(k), format_double(lam), format_double(ex),
                         format_double(rel), format_double(pred), flag(rel <= tol)});
        }
        out.result.report["eig_worst_rel"] = worst;
        out.result.report["harmonic_worst_rel"] = worst_pred;
        pass = pass && worst <= tol && worst_pred <= 1e-13;
    }
    out.result.pass = pass;
}

RevolutionProfile profile_from(const Json& c)
{
    std::string csv = c.at("profile_csv").get<std::string>();
    if (!csv.empty())
        return load_profile_csv(csv);
    std::map<std::string, double> params;
    for (auto& [k, v] : c.at("profile_params").items()) {
        require(v.is_number(), "profile_params: values must be numbers");
        params[k] = v.get<double>();
    }
    try {
        return make_profile(c.at("profile").get<std::string>(), params);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

void run_revolve_decay(const Json& c, Out& out)
{
    RevolutionProfile p = profile_from(c);
    ValidationReport val = validate_profile(p);
    EquatorData eq = equator_data(p);
    const int klo = integer(c, "k_lo"), khi = integer(c, "k_hi"), grid = integer(c, "grid");
    require(klo >= 1 && khi >= klo, "k_lo/k_hi: need 1 <= k_lo <= k_hi");
    std::vector<double> radii = positive(c, "radii");
    std::vector<int> js = ints(c, "blowup_j");
    std::vector<double> band = nums(c, "blowup_band");
    require(band.size() == 2 && band[0] < band[1], "blowup_band: need [lo, hi]");

    ModeFamily fam = solve_family(p, klo, khi, 0, grid);
    {
        CsvWriter t = out.csv("modes.csv", {"k", "lambda", "harmonic_prediction"});
        for (int k = klo; k <= khi; ++k)
            t.row({double(k), fam.get(k, 0).lambda, harmonic_prediction(eq, k)});
    }
    std::vector<double> all = radii;
    for (int j : js)
        all.push_back(std::ldexp(1.0, -j));
    DecayReport rep = agmon_decay_check(fam, p, eq, all, c.at("rel_tol").get<double>());
    bool pass = val.pass;
    int blowup_fail = 0;
    {
        CsvWriter t = out.csv("decay.csv", {"r", "slope", "stderr", "dA_Rmax", "slope_over_log",
                                            "kind", "pass"});
        for (std::size_t i = 0; i < rep.rows.size(); ++i) {
            const DecayRow& r = rep.rows[i];
            bool main = i < radii.size();
            bool ok = main ? r.pass
                           : (r.slope_over_log >= band[0] && r.slope_over_log <= band[1]);
            if (main)
                pass = pass && ok;
            else
                blowup_fail += !ok;
            t.row_mixed({format_double(r.r), format_double(r.slope), format_double(r.stderr_),
                         format_double(r.dA_Rmax), format_double(r.slope_over_log),
                         main ? "lower_bound" : "log_blowup", flag(ok)});
        }
    }
    pass = pass && blowup_fail == 0;
    AgmonTable tab = agmon_table(p, eq, integer(c, "agmon_points"));
    write_agmon_csv(tab, (fs::path(out.dir) / "agmon.csv").string());
    out.result.files.push_back("agmon.csv");
    out.result.report["profile"] = p.name();
    out.result.report["profile_valid"] = val.pass;
    out.result.report["s0"] = eq.s0;
    out.result.report["Rmax"] = eq.Rmax;
    out.result.report["blowup_failures"] = blowup_fail;
    out.result.pass = pass;
}

void run_disk_decay(const Json& c, Out& out)
{
    const int nlo = integer(c, "n_lo"), nhi = integer(c, "n_hi");
    require(nlo >= 1 && nhi >= nlo + 5, "n_lo/n_hi: need at least 6 orders");
    std::vector<int> ns;
    for (int n = nlo; n <= nhi; ++n)
        ns.push_back(n);
    std::vector<double> alphas = positive(c, "alphas");
    const double rtol = c.at("recurrence_tol").get<double>();

    int bound_fail = 0;
    double worst_rec = 0.0;
    {
        CsvWriter t = out.csv("bound_pairs.csv",
                              {"n", "alpha", "value", "bound", "recurrence_residual", "pass"});
        for (int n : ns)
            for (double a : alphas) {
                BoundPair bp = decay_bound_pair(n, a);
                double z = n / std::cosh(a);
                double jm = bessel_j(n - 1, z), j0 = bessel_j(n, z), jp = bessel_j(n + 1, z);
                double scale = std::max({std::abs(jm), std::abs(j0), std::abs(jp)});
                double rec = std::abs(jm + jp - 2.0 * n / z * j0) / scale;
                worst_rec = std::max(worst_rec, rec);
                bool ok = bp.value <= bp.bound;
                bound_fail += !ok;
                t.row({double(n), a, bp.value, bp.bound, rec, ok ? 1.0 : 0.0});
            }
    }
    {
        CsvWriter t = out.csv("whispering.csv", {"n", "z1", "lambda", "norm2"});
        for (const WhisperingMode& w : whispering_modes(nlo, nhi))
            t.row({double(w.n), w.z1, w.lambda, w.norm2});
    }
    DiskDecayOptions opt;
    opt.beta = c.at("beta").get<double>();
    opt.lambda_sixth_term = c.at("sixth_term").get<bool>();
    opt.rel_tol = c.at("rel_tol").get<double>();
    DiskDecayReport rep = disk_decay_check(ns, c.at("r").get<double>(), opt);
    bool slope_ok = std::abs(rep.row.slope - rep.row.dA_Rmax) <= opt.rel_tol * rep.row.dA_Rmax;
    Json& r = out.result.report;
    r["slope"] = rep.row.slope;
    r["stderr"] = rep.row.stderr_;
    r["dA"] = rep.row.dA_Rmax;
    r["beta"] = opt.beta;
    r["beta_max"] = rep.beta_max;
    r["sixth_coef"] = rep.sixth_coef;
    r["bound_failures"] = bound_fail;
    r["recurrence_worst"] = worst_rec;
    out.result.pass = slope_ok && bound_fail == 0 && worst_rec <= rtol;
}

std::vector<double> geometric(double lo, double hi, double ratio)
{
    require(lo > 0.0 && hi > lo && ratio > 1.0, "times: need [lo, hi, ratio] with ratio > 1");
    std::vector<double> v;
    for (double t = lo; t <= hi * (1.0 + 1e-12); t *= ratio)
        v.push_back(t);
    return v;
}

void write_curve(Out& out, const std::string& name, const LocalizationCurve& c)
{
    CsvWriter t = out.csv(name, {"param", "loc", "log10_loc", "floor"});
    std::vector<double> l10 = c.log10_loc();
    for (std::size_t i = 0; i < c.param.size(); ++i)
        t.row({c.param[i], c.loc[i], l10[i], c.floor.empty() ? 0.0 : c.floor[i]});
}

Json fit_json(const CurveFit& f)
{
    return {{"K", f.K}, {"intercept", f.intercept}, {"stderr", f.stderr_}, {"window", f.window}};
}

Json chain_json(const ChainCheck& cc)
{
    return {{"K_eig", cc.K_eig}, {"K_heat", cc.K_heat}, {"K_sigma", cc.K_sigma},
            {"slack", cc.slack}, {"lower", cc.lower},   {"upper", cc.upper}};
}

Json algebra_suite(const Json& c, std::mt19937_64& rng, bool& pass)
{
    const int n = integer(c, "algebra_samples");
    std::uniform_real_distribution<double> U(0.0, 1.0);
    auto logu = [&](double lo, double hi) { return std::exp(std::log(lo) + U(rng) * std::log(hi / lo)); };
    double miller_worst = 0.0;
    for (int i = 0; i < n; ++i)
        miller_worst = std::max(miller_worst, miller_identity_residual(logu(1e-3, 1e3), logu(1e-3, 1e3)));

    int stated = 0, corrected = 0, branch1 = 0;
    for (int i = 0; i < n; ++i) {
        double L = logu(0.1, 10.0), K = 3.0 * U(rng), mu0 = 5.0 * U(rng), a = logu(0.01, 10.0);
        // mu grid plus the maximizer of (1/L - 1/mu) e^{-K mu}
        std::vector<double> grid;
        for (int j = 1; j <= 4000; ++j) {
            double s = j / 4000.0;
            grid.push_back(mu0 + s * s * (50.0 + 10.0 * L));
        }
        if (K > 0.0) {
            double ms = 0.5 * L * (1.0 + std::sqrt(1.0 + 4.0 / (K * L)));
            if (ms > mu0)
                grid.push_back(ms);
        }
        double X = lambda_mu_min_X(L, K, grid) * (1.0 + 1e-12);
        branch1 += L + a <= mu0;
        stated += !lambda_mu_check(L, X, K, mu0, a);
        corrected += !lambda_mu_check(L, X, K, mu0, a, true);
    }
    int conv_fail = 0;
    for (int i = 0; i < n; ++i) {
        double K = 3.0 * U(rng), L = logu(1.0, 10.0);
        auto F = [K](double mu) { return std::exp(K * mu); };
        double X = (1.0 + U(rng)) / F(L);
        conv_fail += !lambda_mu_converse(L, X, F, logu(1e-3, 1e3));
    }
    int trans_fail = 0;
    double ratio_lo = INFINITY, ratio_hi = 0.0;
    for (double x = 1.0; x <= 64.0; x *= std::sqrt(2.0)) {
        Transmutation t = transmutation_integral(1.0, x);
        trans_fail += !t.holds;
        ratio_lo = std::min(ratio_lo, t.ratio);
        ratio_hi = std::max(ratio_hi, t.ratio);
    }
    pass = pass && miller_worst <= 1e-12 && stated == 0 && conv_fail == 0 && trans_fail == 0;
    return {{"miller_worst_residual", miller_worst},
            {"lambda_mu_failures", stated},
            {"lambda_mu_failures_corrected", corrected},
            {"lambda_mu_branch1_samples", branch1},
            {"converse_failures", conv_fail},
            {"transmutation_failures", trans_fail},
            {"transmutation_ratio_range", {ratio_lo, ratio_hi}}};
}

void run_loc_constants(const Json& c, Out& out, std::mt19937_64& rng)
{
    const std::string geom = c.at("geometry").get<std::string>();
    std::vector<double> tr = nums(c, "times");
    require(tr.size() == 3, "times: need [lo, hi, ratio]");
    std::vector<double> Ts = geometric(tr[0], tr[1], tr[2]);
    const double cap = c.at("cap_factor").get<double>();
    bool pass = true;
    Json rows = Json::array();

    if (geom == "interval") {
        std::vector<double> lams;
        for (int N : ints(c, "N"))
            lams.push_back(N * N * pi * pi);
        SpectralBasis Bs = interval_sine_basis(integer(c, "sigma_modes"));
        SpectralBasis Bh = interval_sine_basis(integer(c, "heat_modes"));
        CsvWriter t = out.csv("constants.csv", {"a", "K_sigma", "K_sigma_target", "K_heat",
                                                "K_heat_target", "K_eig", "chain_pass"});
        for (double a : nums(c, "a")) {
            require(a > 0.0 && a < 1.0, "a: entries must lie in (0, 1)");
            Region om = Region::interval(0.0, a);
            LocalizationCurve s = loc_sigma_curve(Bs, om, lams);
            LocalizationCurve e = loc_eig_curve(Bs, om, lams);
            LocalizationCurve h = loc_heat_curve(Bh, om, Ts, cap);
            CurveFit fs = fit_k_sigma(s), fe = fit_k_sigma(e), fh = fit_k_heat(h);
            ChainCheck cc = chain_check(fe, fh, fs);
            double ts = 0.95 * (1.0 - a) / 2.0, th = 0.9 * (1.0 - a) * (1.0 - a) / 4.0;
            bool ok = fs.K >= ts && fh.K >= th && cc.pass;
            pass = pass && ok;
            std::string tag = "a" + format_double(a);
            write_curve(out, "sigma_" + tag + ".csv", s);
            write_curve(out, "eig_" + tag + ".csv", e);
            write_curve(out, "heat_" + tag + ".csv", h);
            t.row({a, fs.K, ts, fh.K, th, fe.K, cc.pass ? 1.0 : 0.0});
            rows.push_back({{"a", a},
                            {"sigma", fit_json(fs)},
                            {"heat", fit_json(fh)},
                            {"eig", fit_json(fe)},
                            {"chain", chain_json(cc)},
                            {"pass", ok}});
        }
    } else if (geom == "sphere") {
        RevolutionProfile p = make_profile("sphere");
        std::vector<int> ks = ints(c, "k_sweep");
        require(ks.size() == 3 && ks[2] > 0 && ks[1] > ks[0], "k_sweep: need [lo, hi, step]");
        std::vector<double> lams;
        for (int k = ks[0]; k <= ks[1]; k += ks[2])
            lams.push_back(k * (k + 1.0) + 0.5);
        SpectralBasis B = revolution_basis(p, integer(c, "k_max"), c.at("lambda_max").get<double>(),
                                           integer(c, "grid"));
        require(B.lambda_max() >= lams.back(), "lambda_max: below the sweep");
        CsvWriter t = out.csv("constants.csv", {"r", "dA", "K_sigma", "K_heat", "K_eig",
                                                "chain_lower", "chain_upper"});
        for (double r : positive(c, "radii")) {
            Region om = Region::interval(0.0, r);
            LocalizationCurve s = loc_sigma_curve(B, om, lams);
            LocalizationCurve e = loc_eig_curve(B, om, lams);
            LocalizationCurve h = loc_heat_curve(B, om, Ts, cap);
            CurveFit fs = fit_k_sigma(s), fe = fit_k_sigma(e), fh = fit_k_heat(h);
            ChainCheck cc = chain_check(fe, fh, fs);
            double dA = agmon_distance(p, r);
            bool ok = cc.pass && fs.K >= 0.95 * dA;
            pass = pass && ok;
            std::string tag = "r" + format_double(r);
            write_curve(out, "sigma_" + tag + ".csv", s);
            write_curve(out, "eig_" + tag + ".csv", e);
            write_curve(out, "heat_" + tag + ".csv", h);
            t.row({r, dA, fs.K, fh.K, fe.K, cc.lower ? 1.0 : 0.0, cc.upper ? 1.0 : 0.0});
            rows.push_back({{"r", r},
                            {"dA", dA},
                            {"sigma", fit_json(fs)},
                            {"heat", fit_json(fh)},
                            {"eig", fit_json(fe)},
                            {"chain", chain_json(cc)},
                            {"pass", ok}});
        }
    } else {
        throw ConfigError("geometry: expected 'interval' or 'sphere'");
    }
    out.result.report["geometry"] = geom;
    out.result.report["rows"] = rows;
    if (c.at("algebra").get<bool>())
        out.result.report["algebra"] = algebra_suite(c, rng, pass);
    out.result.pass = pass;
}

void run_small_ball(const Json& c, Out& out)
{
    std::vector<double> lams;
    for (int N : ints(c, "N"))
        lams.push_back(N * N * pi * pi * (1.0 + 1e-12));
    SpectralBasis B = interval_sine_basis(integer(c, "modes"));
    ScalingReport rep;
    try {
        rep = small_ball_scaling(B, c.at("x0").get<double>(), positive(c, "radii"), lams);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    CsvWriter t = out.csv("small_ball.csv", {"r", "lambda", "minus_log_loc", "model"});
    for (std::size_t i = 0; i < rep.r.size(); ++i)
        t.row({rep.r[i], rep.lambda[i], rep.minus_log_loc[i],
               (rep.C1 * std::sqrt(rep.lambda[i]) + rep.C2) * (1.0 + std::log(1.0 / rep.r[i]))});
    Json& r = out.result.report;
    r["C1"] = rep.C1;
    r["C2"] = rep.C2;
    r["r2"] = rep.r2;
    r["r2_centered"] = rep.r2_centered;
    r["r2_log_r"] = rep.r2_log_r;
    r["envelope"] = rep.envelope;
    r["marginal_sqrt_lambda_slope"] = rep.marginal_sqrt_lambda_slope;
    r["marginal_log_r_slope"] = rep.marginal_log_r_slope;
    out.result.pass = rep.r2 >= c.at("r2_min").get<double>();
}

using V2 = Eigen::Vector2d;

void run_carleman(const Json& c, Out& out, std::mt19937_64& rng)
{
    const double ctau = c.at("conj_tau").get<double>();
    std::vector<double> band = nums(c, "conj_band");
    require(band.size() == 2, "conj_band: need [lo, hi]");
    bool pass = true;
    Json& rep = out.result.report;
    {
        CsvWriter t = out.csv("conjugation.csv", {"dim", "n", "h", "residual", "ratio"});
        for (int dim : {1, 2}) {
            std::vector<int> ns = ints(c, dim == 1 ? "conj_n_1d" : "conj_n_2d");
            require(ns.size() >= 2, "conj_n: need at least two grids");
            double prev = NAN;
            for (int n : ns) {
                Grid g(dim, n);
                MetricField m = MetricField::flat(g);
                Field phi, u;
                if (dim == 1) {
                    phi = sample(g, [](const V2& x) { return std::exp(-x(0)); });
                    u = sample(g, [](const V2& x) { return std::sin(pi * x(0)) * bump(x, V2(0.5, 0), 0.4); });
                } else {
                    phi = sample(g, [](const V2& x) { return std::exp(-2.0 * (x - V2(-0.5, 0.5)).norm()); });
                    u = sample(g, [](const V2& x) { return bump(x, V2(0.45, 0.55), 0.3); });
                }
                double res = conjugation_identity_check(phi, m, u, ctau);
                double ratio = std::isnan(prev) ? NAN : prev / res;
                if (!std::isnan(ratio))
                    pass = pass && ratio >= band[0] && ratio <= band[1];
                t.row({double(dim), double(n), g.h(), res, ratio});
                prev = res;
            }
        }
    }

    const int bumps = integer(c, "bumps"), dirs = integer(c, "directions");
    CsvWriter margins = out.csv("margins.csv", {"dim", "metric", "lambda", "tau", "lhs", "rhs",
                                                "margin", "status"});
    int failures = 0, inconclusive = 0, checks = 0;
    auto flat_suite = [&](int dim, int n, const PointFn& Psi, double lambda) {
        Grid g(dim, n);
        MetricField m = MetricField::flat(g);
        WeightPair w = convexify(sample(g, Psi), m, lambda);
        Subellipticity s = subellipticity_minima(w, m, dirs, rng());
        CarlemanSetup setup = carleman_setup(w, m, s);
        bool ok = s.minB > 0.0 && s.minE > 0.0 && s.dominates;
        for (int b = 0; b < bumps; ++b) {
            Field v = random_bump(g, rng);
            for (double f : {1.0, 2.0, 4.0}) {
                CarlemanRow r = carleman_inequality_check(w, m, setup, s, v, f * setup.tau0);
                ++checks;
                failures += r.status == MarginStatus::fail;
                inconclusive += r.status == MarginStatus::inconclusive;
                margins.row_mixed({std::to_string(dim), "flat", format_double(lambda),
                                   format_double(r.tau), format_double(r.lhs), format_double(r.rhs),
                                   format_double(r.margin), to_string(r.status)});
            }
        }
        return Json{{"dim", dim},     {"n", n},           {"lambda", lambda},
                    {"minB", s.minB}, {"minE", s.minE},   {"dominates", s.dominates},
                    {"C0", setup.C0}, {"tau0", setup.tau0}, {"subelliptic", ok}};
    };

    PointFn psi1 = [](const V2& x) { return -x(0); };
    PointFn psi2 = [](const V2& x) { return -(x - V2(-0.5, 0.5)).norm(); };
    const int n2 = integer(c, "n_2d");
    double lstar;
    {
        std::vector<double> br = nums(c, "lambda_bracket");
        require(br.size() == 2 && br[0] > 0.0 && br[1] > br[0], "lambda_bracket: need [lo, hi]");
        Grid g(2, n2);
        MetricField m = MetricField::flat(g);
        Field Psi = sample(g, psi2);
        lstar = critical_lambda(Psi, m, br[0], br[1]);
        CsvWriter t = out.csv("lambda_sweep.csv", {"lambda", "minB", "minE"});
        bool beyond = true;
        for (double f : {0.5, 0.9, 1.1, 1.5, 2.0, 3.0}) {
            Subellipticity s = subellipticity_minima(convexify(Psi, m, f * lstar), m, dirs, rng());
            t.row({f * lstar, s.minB, s.minE});
            if (f > 1.0)
                beyond = beyond && s.minB > 0.0 && s.minE > 0.0;
        }
        pass = pass && beyond;
        rep["lambda_star"] = lstar;
        rep["positive_beyond_lambda_star"] = beyond;
    }
    Json suites = Json::array();
    suites.push_back(flat_suite(1, integer(c, "n_1d"), psi1, c.at("lambda_1d").get<double>()));
    const double l2 = c.at("lambda_2d").get<double>();
    require(l2 > lstar, "lambda_2d: must exceed the critical lambda");
    suites.push_back(flat_suite(2, n2, psi2, l2));
    for (const Json& s : suites)
        pass = pass && s.at("subelliptic").get<bool>();
    pass = pass && failures == 0;
    rep["flat"] = suites;
    rep["flat_checks"] = checks;
    rep["flat_failures"] = failures;
    rep["flat_inconclusive"] = inconclusive;

    UniformityReport u = uniformity_check(Grid(2, n2), psi2, l2, integer(c, "metrics"),
                                          c.at("amplitude").get<double>(),
                                          integer(c, "bumps_per_metric"), rng);
    rep["uniformity"] = {{"lambda", u.lambda},         {"C0", u.C0},
                         {"tau0", u.tau0},             {"minB_flat", u.minB_flat},
                         {"minB_worst", u.minB_worst}, {"minE_worst", u.minE_worst},
                         {"metrics", u.metrics},       {"checks", u.checks},
                         {"inconclusive", u.inconclusive}, {"failures", u.failures},
                         {"pass", u.pass}};
    out.result.pass = pass && u.pass;
}

void run_heatpos(const Json& c, Out& out, std::mt19937_64& rng)
{
    const int cells = integer(c, "cells");
    const double dt = c.at("dt").get<double>(), eps = c.at("eps").get<double>();
    const double eta = c.at("eta").get<double>(), D = c.at("D").get<double>();
    std::vector<double> om = nums(c, "omega"), times = positive(c, "times");
    require(om.size() == 2 && om[0] < om[1], "omega: need [lo, hi]");
    require(D >= *std::max_element(times.begin(), times.end()), "D: must cover the times");
    const double z0 = c.at("z0").get<double>();
    const double xc = c.at("bump_center").get<double>(), wd = c.at("bump_width").get<double>();

    HeatGeometry g = interval_geometry(cells);
    std::vector<double> u0(cells);
    for (int j = 0; j < cells; ++j)
        u0[j] = std::exp(-std::pow((g.x[j] - xc) / wd, 2));
    HeatTrajectory tr = solve_heat(g, u0, D, dt);

    Json& rep = out.result.report;
    bool pass = true;
    {
        double m0 = tr.mass(0), drift = 0.0, umin = INFINITY;
        CsvWriter t = out.csv("mass.csv", {"t", "mass", "min_u"});
        const std::size_t stride = std::max<std::size_t>(1, tr.t.size() / 200);
        for (std::size_t s = 0; s < tr.t.size(); ++s) {
            double mn = *std::min_element(tr.u[s].begin(), tr.u[s].end());
            umin = std::min(umin, mn);
            drift = std::max(drift, std::abs(tr.mass(s) - m0) / m0);
            if (s % stride == 0 || s + 1 == tr.t.size())
                t.row({tr.t[s], tr.mass(s), mn});
        }
        rep["mass_drift"] = drift;
        rep["min_u"] = umin;
        pass = pass && umin >= 0.0 && drift <= c.at("mass_tol").get<double>();
    }
    {
        std::vector<double> ar = nums(c, "alpha_range");
        require(ar.size() == 2 && ar[0] > 1.0 && ar[1] >= ar[0], "alpha_range: need 1 < lo <= hi");
        std::uniform_real_distribution<double> U(0.0, 1.0);
        const double Tm = *std::max_element(times.begin(), times.end());
        CsvWriter t = out.csv("li_yau.csv", {"alpha", "t1", "t2", "x", "y", "margin"});
        int viol = 0;
        const int trials = integer(c, "li_yau_trials");
        for (int i = 0; i < trials; ++i) {
            double a = ar[0] + (ar[1] - ar[0]) * U(rng);
            double t1 = Tm * (0.005 + 0.9 * U(rng));
            double t2 = t1 + (Tm - t1) * (0.01 + 0.99 * U(rng));
            double x = U(rng), y = U(rng);
            double m = li_yau_check(tr, a, t1, t2, x, y);
            viol += m < 0.0;
            t.row({a, t1, t2, x, y, m});
        }
        rep["li_yau_trials"] = trials;
        rep["li_yau_violations"] = viol;
        pass = pass && viol == 0;
    }
    CsvWriter obs = out.csv("observability.csv", {"variant", "T", "eps", "eta", "distance",
                                                  "C_eta", "lhs", "rhs", "ratio", "pass"});
    auto emit = [&](const ObservabilityReport& r) {
        obs.row_mixed({r.variant, format_double(r.T), format_double(r.eps), format_double(r.eta),
                       format_double(r.distance), format_double(r.C_eta), format_double(r.lhs),
                       format_double(r.rhs), format_double(r.ratio), flag(r.pass)});
    };
    for (double T : times) {
        ObservabilityReport a = positive_observability_check(tr, om[0], om[1], T, eps, eta);
        ObservabilityReport b = pointwise_observability_check(tr, z0, T, eps, eta);
        emit(a);
        emit(b);
        pass = pass && a.pass && b.pass;
    }
    // largest T <= D on the halving sweep at which both variants pass
    double best = 0.0;
    for (int k = 0; k <= integer(c, "sweep_halvings"); ++k) {
        double T = std::ldexp(D, -k);
        ObservabilityReport a = positive_observability_check(tr, om[0], om[1], T, eps, eta);
        ObservabilityReport b = pointwise_observability_check(tr, z0, T, eps, eta);
        emit(a);
        emit(b);
        if (a.pass && b.pass)
            best = std::max(best, T);
    }
    rep["largest_passing_T"] = best;
    NegativeControl nc = negative_control_example(cells, times.back(), eps, dt);
    rep["negative_control"] = {{"nodal_pass", nc.nodal.pass},
                               {"nodal_ratio", nc.nodal.ratio},
                               {"max_abs_observation", nc.max_abs_observation},
                               {"shifted_pass", nc.shifted.pass},
                               {"shifted_ratio", nc.shifted.ratio},
                               {"as_predicted", nc.as_predicted}};
    out.result.pass = pass && nc.as_predicted;
}

std::string timestamp()
{
    std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
    return buf;
}

Json versions()
{
    return {{"lab", "1.0.0"},
#ifdef __VERSION__
            {"compiler", __VERSION__},
#endif
            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                          "." + std::to_string(EIGEN_MINOR_VERSION)},
            {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_MINOR)},
#ifdef _OPENMP
            {"openmp", _OPENMP},
#else
            {"openmp", 0},
#endif
            {"cxx", __cplusplus}};
}

} // namespace

const std::vector<ExperimentInfo>& experiment_catalog()
{
    static const std::vector<ExperimentInfo> cat = {
        {"sphere-exact", "ground-state ball norms on the round sphere against the closed form",
         "exact cap norm of the k-th ground state with its tan(r)^2/(2k+2) remainder; "
         "eigenvalues k(k+1) and the harmonic prediction"},
        {"revolve-decay", "decay slopes of -log ball norms against sqrt(lambda) on a surface of revolution",
         "K_eig(B(N, r)) >= d_A(r) R(s0) and the |log r| blow-up"},
        {"disk-decay", "whispering-gallery modes of the disk and the Bessel decay bound",
         "disk decay rate d_A(r) and |J_n(n/cosh a)| <= e^{n(tanh a - a)}"},
        {"loc-constants", "localization curves and fitted K_sigma, K_eig, K_heat",
         "K_sigma >= L/2, K_heat >= L^2/4 and the chain K_eig^2/4 <= K_heat <= 4 K_sigma^2"},
        {"small-ball", "spectral inequality cost on small balls",
         "-log Loc ~ (C1 sqrt(lambda) + C2)(1 + log 1/r)"},
        {"carleman", "convexified weights, subellipticity and discrete Carleman margins",
         "Carleman estimate with boundary term, uniform over Lipschitz metrics"},
        {"heatpos", "positive heat solutions: Li-Yau and positive observability",
         "Li-Yau inequality and explicit observability of positive solutions"},
    };
    return cat;
}

std::string catalog_text()
{
    std::ostringstream os;
    for (const ExperimentInfo& e : experiment_catalog())
        os << e.tag << "\n    " << e.summary << "\n    reproduces: " << e.reproduces << "\n";
    return os.str();
}

Json catalog_json()
{
    Json out = Json::array();
    for (const ExperimentInfo& e : experiment_catalog())
        out.push_back({{"tag", e.tag}, {"summary", e.summary}, {"reproduces", e.reproduces}});
    return out;
}

Json validate_config(const Json& config)
{
    if (!config.is_object())
        throw ConfigError("config must be a JSON object");
    if (!config.contains("experiment") || !config.at("experiment").is_string())
        throw ConfigError("config needs a string 'experiment'\n" + catalog_text());
    const std::string tag = config.at("experiment").get<std::string>();
    Json full = defaults(tag);
    full["experiment"] = tag;
    full["seed"] = std::uint64_t{1};
    full["out"] = "runs";
    for (auto& [key, v] : config.items()) {
        if (key == "experiment")
            continue;
        if (!full.contains(key))
            throw ConfigError("unknown key '" + key + "' for experiment " + tag);
        const Json& def = full.at(key);
        if (def.is_array()) {
            if (!v.is_array() || v.empty())
                throw ConfigError("'" + key + "' must be a nonempty array");
            for (const Json& e : v)
                if (!same_kind(def.front(), e))
                    throw ConfigError("'" + key + "' has an entry of the wrong type");
        } else if (key == "seed") {
            if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
                throw ConfigError("'seed' must be a nonnegative integer");
        } else if (!same_kind(def, v)) {
            throw ConfigError("'" + key + "' has the wrong type");
        }
        full[key] = v;
    }
    return full;
}

ExperimentOutput run_experiment(const Json& config, const std::string& dir, std::mt19937_64& rng)
{
    Json c = validate_config(config);
    Out out{dir, {}};
    const std::string tag = c.at("experiment").get<std::string>();
    if (tag == "sphere-exact")
        run_sphere_exact(c, out);
    else if (tag == "revolve-decay")
        run_revolve_decay(c, out);
    else if (tag == "disk-decay")
        run_disk_decay(c, out);
    else if (tag == "loc-constants")
        run_loc_constants(c, out, rng);
    else if (tag == "small-ball")
        run_small_ball(c, out);
    else if (tag == "carleman")
        run_carleman(c, out, rng);
    else if (tag == "heatpos")
        run_heatpos(c, out, rng);
    return out.result;
}

RunResult run_config_file(const std::string& path, const RunOptions& opt)
{
    std::ifstream in(path);
    if (!in)
        return {1, "", "cannot read config " + path};
    Json cfg;
    try {
        cfg = Json::parse(in);
    } catch (const Json::parse_error& e) {
        return {1, "", std::string("config is not valid JSON: ") + e.what()};
    }
    return run_config(std::move(cfg), opt);
}

RunResult run_config(Json config, const RunOptions& opt)
{
    RunResult res;
    try {
        if (config.is_object()) {
            if (opt.out)
                config["out"] = *opt.out;
            if (opt.seed)
                config["seed"] = *opt.seed;
        }
        Json c = validate_config(config);
        const std::string tag = c.at("experiment").get<std::string>();
        fs::path base = fs::path(c.at("out").get<std::string>()) / tag;
        std::string stamp = timestamp();
        fs::path dir = base / stamp;
        for (int i = 2; fs::exists(dir); ++i)
            dir = base / (stamp + "_" + std::to_string(i));
        fs::create_directories(dir);
        res.run_dir = dir.string();

        const std::uint64_t seed = c.at("seed").get<std::uint64_t>();
        std::mt19937_64 rng(seed);
        auto t0 = std::chrono::steady_clock::now();
        ExperimentOutput r = run_experiment(c, dir.string(), rng);
        double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        res.exit_code = r.pass ? 0 : 2;
        Json manifest = {{"experiment", tag},
                         {"config", c},
                         {"seed", seed},
                         {"rng", "mt19937_64"},
                         {"versions", versions()},
                         {"started_utc", stamp},
                         {"wall_time_s", wall},
                         {"pass", r.pass},
                         {"exit_code", res.exit_code},
                         {"files", r.files},
                         {"report", r.report}};
        write_text((dir / "manifest.json").string(), manifest.dump(2) + "\n");
        res.message = tag + (r.pass ? ": pass" : ": check failed") + " (" + dir.string() + ")";
    } catch (const ConfigError& e) {
        res.exit_code = 1;
        res.message = std::string("config error: ") + e.what();
    } catch (const std::exception& e) {
        res.exit_code = 1;
        res.message = std::string("error: ") + e.what();
    }
    return res;
}

} // namespace lab
