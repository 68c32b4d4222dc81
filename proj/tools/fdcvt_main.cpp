// fdcvt: homoscedasticity test for fixed-design linear regression.
//
// Subcommands:
//   test      run the test on a CSV dataset
//   simulate  empirical size/power studies
//   validate  cross-check the closed-form moments against exact enumeration

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fdcvt/fdcvt.hpp"

using json = nlohmann::ordered_json;

namespace {

constexpr Eigen::Index kMaxN = 4096;  // dense n×n functionals beyond this are refused

struct TestArgs {
    std::string data_path;
    std::string response;
    bool no_intercept = false;
    std::vector<double> moments{3.0, 15.0, 105.0};
    double alpha = 0.05;
    std::string format = "text";
    bool two_sided = false;
};

struct SimArgs {
    std::int64_t n = 0, p = 0;
    std::string design = "normal";
    std::string error = "normal";
    std::string model = "null";
    int reps = 1000;
    double alpha = 0.05;
    std::uint64_t seed = 0;
    bool fixed_design = false;
    std::string format = "json";
};

struct ValidateArgs {
    std::int64_t n = 8, p = 2;
    std::uint64_t seed = 1;
    std::string sigma = "const";
};

std::string profile_label(double m4, double m6, double m8) {
    if (m4 == 3.0 && m6 == 15.0 && m8 == 105.0) return "gaussian";
    if (m4 == 1.0 && m6 == 1.0 && m8 == 1.0) return "two_point";
    return "custom";
}

int run_cmd_test(const TestArgs& args) {
    const fdcvt::Dataset ds = fdcvt::load_csv(args.data_path);
    const fdcvt::Index resp = fdcvt::resolve_column(ds, args.response);

    const fdcvt::Index n = ds.rows();
    const fdcvt::Index k = ds.cols() - 1;  // covariates in the file
    const bool intercept = !args.no_intercept;
    const fdcvt::Index p = k + (intercept ? 1 : 0);
    if (k < 1) throw fdcvt::DimensionMismatch("dataset has no covariate columns");
    if (n <= p)
        throw fdcvt::DimensionMismatch("need n > p after intercept handling (n=" +
                                      std::to_string(n) + ", p=" + std::to_string(p) + ")");
    if (n > kMaxN)
        throw fdcvt::ParseError("n = " + std::to_string(n) + " exceeds the supported " +
                               std::to_string(kMaxN) + " rows (dense n×n functionals)");

    fdcvt::Matrix x(n, p);
    fdcvt::Index col = 0;
    if (intercept) x.col(col++).setOnes();
    for (fdcvt::Index j = 0; j < ds.cols(); ++j)
        if (j != resp) x.col(col++) = ds.values.col(j);
    const fdcvt::Vector y = ds.values.col(resp);

    const auto profile = fdcvt::cumulants_from_moments(
        args.moments[0], args.moments[1], args.moments[2],
        profile_label(args.moments[0], args.moments[1], args.moments[2]));

    const fdcvt::DesignMatrix design{std::move(x)};
    fdcvt::TestReport report = fdcvt::run_test(design, y, profile);
    double p_value = report.p_value;
    if (args.two_sided) p_value = 2.0 * fdcvt::normal_sf(std::abs(report.z));
    const bool reject = p_value < args.alpha;

    if (args.format == "json") {
        json out;
        out["n"] = report.n;
        out["p"] = report.p;
        out["T"] = report.T;
        out["a"] = report.a;
        out["b"] = report.b;
        out["z"] = report.z;
        out["p_value"] = p_value;
        out["reject"] = reject;
        out["alpha"] = args.alpha;
        out["profile"] = {{"M4", profile.M4}, {"M6", profile.M6}, {"M8", profile.M8}};
        out["tr_P_hadamard"] = report.t1;
        std::cout << out.dump(2) << "\n";
    } else {
        std::printf("homoscedasticity test (%s errors profile)\n", profile.name.c_str());
        std::printf("  n = %" PRId64 ", p = %" PRId64 " (%s intercept)\n",
                    static_cast<std::int64_t>(report.n), static_cast<std::int64_t>(report.p),
                    intercept ? "with" : "no");
        std::printf("  T        = %.6g\n", report.T);
        std::printf("  a        = %.6g\n", report.a);
        std::printf("  b        = %.6g\n", report.b);
        std::printf("  z        = %.6g\n", report.z);
        std::printf("  p-value  = %.6g (%s)\n", p_value,
                    args.two_sided ? "two-sided" : "one-sided upper tail");
        std::printf("  tr(P∘P)  = %.6g\n", report.t1);
        std::printf("  decision = %s H0 at alpha = %.6g\n",
                    reject ? "reject" : "do not reject", args.alpha);
    }
    return 0;
}

int run_cmd_simulate(const SimArgs& args) {
    if (args.n > kMaxN)
        throw fdcvt::ParseError("--n exceeds the supported " + std::to_string(kMaxN));
    fdcvt::SimulationConfig cfg;
    cfg.n = args.n;
    cfg.p = args.p;
    cfg.design_law = fdcvt::parse_design_law(args.design);
    cfg.error_law = fdcvt::parse_error_law(args.error);
    cfg.model = fdcvt::parse_model(args.model);
    cfg.reps = args.reps;
    cfg.alpha = args.alpha;
    cfg.seed = args.seed;
    cfg.fixed_design = args.fixed_design;

    const fdcvt::SimulationResult res = fdcvt::empirical_rate(cfg);

    if (args.format == "json") {
        json out;
        out["config"] = {{"n", args.n},
                         {"p", args.p},
                         {"design", fdcvt::to_string(cfg.design_law)},
                         {"error", fdcvt::to_string(cfg.error_law)},
                         {"model", fdcvt::to_string(cfg.model)},
                         {"reps", args.reps},
                         {"alpha", args.alpha},
                         {"seed", args.seed},
                         {"fixed_design", args.fixed_design}};
        out["rejection_rate"] = res.rejection_rate;
        out["wilson_ci"] = {{"lo", res.wilson_lo}, {"hi", res.wilson_hi}};
        out["reps_used"] = res.reps_used;
        out["mean_T"] = res.mean_T;
        out["mean_a"] = res.mean_a;
        std::cout << out.dump(2) << "\n";
    } else {
        std::printf("simulate: n=%" PRId64 " p=%" PRId64 " design=%s error=%s model=%s reps=%d"
                    " alpha=%.6g seed=%" PRIu64 "%s\n",
                    args.n, args.p, fdcvt::to_string(cfg.design_law),
                    fdcvt::to_string(cfg.error_law), fdcvt::to_string(cfg.model), args.reps,
                    args.alpha, args.seed, args.fixed_design ? " fixed-design" : "");
        std::printf("  rejection rate = %.6g  (95%% Wilson [%.6g, %.6g], %d reps)\n",
                    res.rejection_rate, res.wilson_lo, res.wilson_hi, res.reps_used);
        std::printf("  mean T = %.6g, mean a = %.6g\n", res.mean_T, res.mean_a);
    }
    return 0;
}

int run_cmd_validate(const ValidateArgs& args) {
    const fdcvt::Index n = args.n, p = args.p;
    const fdcvt::DesignMatrix design = fdcvt::gen_design(fdcvt::DesignLaw::normal, n, p, args.seed);
    const fdcvt::ProjectionMatrix pm = fdcvt::projection_matrix(design);
    fdcvt::Vector sigma = fdcvt::Vector::Ones(n);
    if (args.sigma == "half2") sigma.tail(n / 2).setConstant(2.0);

    const auto profile = fdcvt::two_point_profile();
    const auto gm =
        fdcvt::general_moments(fdcvt::general_functionals(pm, sigma), profile, n);
    const auto oracle = fdcvt::enumerate_two_point(pm.matrix() * sigma.asDiagonal());

    struct Row {
        const char* name;
        double closed, exact;
        bool gate;  // exact rows gate the exit code; leading-order rows do not
    };
    const Row rows[] = {
        {"ET1", gm.ET1, oracle.ET1, true},
        {"ET2", gm.ET2, oracle.ET2, true},
        {"VarT1", gm.VarT1, oracle.VarT1, true},
        {"VarT2 (leading)", gm.VarT2_leading, oracle.VarT2, false},
        {"Cov (leading)", gm.Cov_leading, oracle.Cov, false},
    };

    std::printf("validate: n=%" PRId64 " p=%" PRId64 " seed=%" PRIu64 " sigma=%s (two-point errors)\n",
                args.n, args.p, args.seed, args.sigma.c_str());
    std::printf("%-16s %22s %22s %12s %6s\n", "quantity", "closed_form", "oracle", "rel_error",
                "pass");
    bool all_pass = true;
    for (const Row& r : rows) {
        const double rel = fdcvt::relative_gap(r.closed, r.exact);
        if (r.gate) {
            const bool pass = rel < 1e-8;
            all_pass = all_pass && pass;
            std::printf("%-16s %22.15g %22.15g %12.3g %6s\n", r.name, r.closed, r.exact, rel,
                        pass ? "yes" : "NO");
        } else {
            const double ratio = r.exact != 0.0 ? r.closed / r.exact : 0.0;
            std::printf("%-16s %22.15g %22.15g %12s %6s\n", r.name, r.closed, r.exact,
                        ("r=" + std::to_string(ratio)).c_str(), "n/a");
        }
    }
    std::printf("%s\n", all_pass ? "all exact rows pass at 1e-8 relative"
                                 : "EXACT ROW MISMATCH");
    return all_pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Homoscedasticity test for fixed-design regression"};
    app.require_subcommand(1);

    TestArgs targs;
    auto* cmd_test = app.add_subcommand("test", "Test a CSV dataset for homoscedasticity");
    cmd_test->add_option("--data", targs.data_path, "CSV file with a header row")->required();
    cmd_test->add_option("--response", targs.response, "Response column (name or 0-based index)")
        ->required();
    auto* icpt = cmd_test->add_flag("--intercept", "Add an intercept column (default)");
    cmd_test->add_flag("--no-intercept", targs.no_intercept, "Do not add an intercept column")
        ->excludes(icpt);
    cmd_test
        ->add_option("--moments", targs.moments,
                     "Error profile moments M4 M6 M8 (default gaussian 3 15 105)")
        ->expected(3);
    cmd_test->add_option("--alpha", targs.alpha, "Test level")->check(CLI::Range(1e-12, 1.0));
    cmd_test->add_option("--format", targs.format, "text or json")
        ->check(CLI::IsMember({"text", "json"}));
    cmd_test->add_flag("--two-sided", targs.two_sided, "Report a two-sided p-value");

    SimArgs sargs;
    auto* cmd_sim = app.add_subcommand("simulate", "Empirical size/power study");
    cmd_sim->add_option("--n", sargs.n, "Sample size")->required()->check(CLI::PositiveNumber);
    cmd_sim->add_option("--p", sargs.p, "Covariate count")->required()->check(CLI::PositiveNumber);
    cmd_sim->add_option("--design", sargs.design, "Design law")
        ->check(CLI::IsMember({"normal", "t1", "f32", "lognormal", "gamma22", "uniform01",
                               "lognormal_scaled"}));
    cmd_sim->add_option("--error", sargs.error, "Error law")
        ->check(CLI::IsMember({"normal", "two_point"}));
    cmd_sim->add_option("--model", sargs.model, "null, model1 or model2")
        ->check(CLI::IsMember({"null", "model1", "model2"}));
    cmd_sim->add_option("--reps", sargs.reps, "Replications")->check(CLI::Range(100, 10000000));
    cmd_sim->add_option("--alpha", sargs.alpha, "Test level")->check(CLI::Range(1e-12, 1.0));
    cmd_sim->add_option("--seed", sargs.seed, "Seed");
    cmd_sim->add_flag("--fixed-design", sargs.fixed_design,
                      "Draw one design and condition on it");
    cmd_sim->add_option("--format", sargs.format, "text or json")
        ->check(CLI::IsMember({"text", "json"}));

    ValidateArgs vargs;
    auto* cmd_val = app.add_subcommand("validate", "Closed forms vs exact enumeration");
    cmd_val->add_option("--n", vargs.n, "Sample size (<= 12)")->check(CLI::Range(2, 12));
    cmd_val->add_option("--p", vargs.p, "Covariate count")->check(CLI::PositiveNumber);
    cmd_val->add_option("--seed", vargs.seed, "Seed");
    cmd_val->add_option("--sigma", vargs.sigma, "const or half2")
        ->check(CLI::IsMember({"const", "half2"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*cmd_test) return run_cmd_test(targs);
        if (*cmd_sim) return run_cmd_simulate(sargs);
        if (*cmd_val) return run_cmd_validate(vargs);
    } catch (const fdcvt::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const fdcvt::UnknownLaw& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const fdcvt::TooLarge& e) {
        std::cerr << "error: TooLarge: " << e.what() << "\n";
        return 2;
    } catch (const fdcvt::RankDeficient& e) {
        std::cerr << "error: RankDeficient: " << e.what() << "\n";
        return 3;
    } catch (const fdcvt::NonPositiveVariance& e) {
        std::cerr << "error: NonPositiveVariance: " << e.what() << "\n";
        return 3;
    } catch (const fdcvt::DegenerateResiduals& e) {
        std::cerr << "error: DegenerateResiduals: " << e.what() << "\n";
        return 3;
    } catch (const fdcvt::OddPForModel2& e) {
        std::cerr << "error: OddPForModel2: " << e.what() << "\n";
        return 3;
    } catch (const fdcvt::PersistentRankDeficiency& e) {
        std::cerr << "error: PersistentRankDeficiency: " << e.what() << "\n";
        return 3;
    } catch (const fdcvt::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
