#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <thread>

#include "mpr2/solver.hpp"
#include "oracles.hpp"

using namespace mpr2;

namespace {
const FpEnv env;
constexpr FormatIndex kHalf = 1, kDouble = 3;

SolverConfig defaults() { return SolverConfig{}; }

SolverConfig exact_double_config() {
    SolverConfig cfg;
    cfg.mode = SolverMode::Mpr2Guaranteed;
    cfg.stack = FormatStack({FpFormat::binary64()});
    cfg.disable_error_sources = true;
    cfg.keep_iterates = true;
    return cfg;
}

Problem one_dim_half_quadratic() {
    // f(x) = x^2 / 2
    ExprBuilder b(1);
    Problem p;
    p.name = "half_square";
    p.n = 1;
    p.expr = b.build(b.mul(b.lit(0.5), b.ipow(b.var(0), 2)));
    p.x0 = {1.0};
    p.f_low = 0.0;
    p.lipschitz_hint = 1.0;
    p.minimizer = std::vector<double>{0.0};
    return p;
}
} // namespace

TEST_CASE("validate_params accepts the reference values and flags equality") {
    SolverConfig cfg = defaults();
    auto warnings = validate_params(cfg);  // gamma2 = 2 variant of the defaults
    // eta0 = eta1/2 exactly: accepted with a warning
    CHECK(warnings.size() == 1);

    SolverConfig strict = defaults();
    strict.eta0 = 0.04;
    CHECK(validate_params(strict).empty());
}

TEST_CASE("validate_params rejects violated inequalities") {
    SolverConfig cfg = defaults();
    cfg.eta0 = 0.06;  // eta0 < eta1/2 violated
    CHECK_THROWS_AS(validate_params(cfg), InvalidConfig);

    cfg = defaults();
    cfg.gamma2 = 1.0;  // 1 < gamma2 violated (the published table value)
    CHECK_THROWS_AS(validate_params(cfg), InvalidConfig);
    cfg.allow_published_params = true;
    CHECK(validate_params(cfg).size() >= 1);

    cfg = defaults();
    cfg.eta2 = 1.0;
    CHECK_THROWS_AS(validate_params(cfg), InvalidConfig);

    cfg = defaults();
    cfg.eta2 = 0.95;  // eta0 + kappa_mu/2 > (1-eta2)/2
    CHECK_THROWS_AS(validate_params(cfg), InvalidConfig);

    cfg = defaults();
    cfg.sigma0 = 0.75;
    CHECK_THROWS_AS(validate_params(cfg), InvalidConfig);

    cfg = defaults();
    cfg.gamma3 = 3.0;
    CHECK_THROWS_AS(validate_params(cfg), InvalidConfig);

    cfg = defaults();
    cfg.relax_a = 0.0;
    CHECK_THROWS_AS(validate_params(cfg), InvalidConfig);
}

TEST_CASE("compute_step") {
    TaggedVector g{{1.0, -2.0}, kDouble};
    TaggedVector s = compute_step(env, g, 2.0);
    CHECK(s.values == std::vector<double>{-0.5, 1.0});
    CHECK(s.fmt == kDouble);

    // sigma = 1: s = -g exactly
    TaggedVector s1 = compute_step(env, g, 1.0);
    CHECK(s1.values == std::vector<double>{-1.0, 2.0});

    // 3 * 2^-14 is still a normal binary16 value: exact, no flag
    RoundStatus st;
    TaggedVector gh{{3.0}, kHalf};
    TaggedVector sh = compute_step(env, gh, 0x1p14, &st);
    CHECK(!st.underflow);
    CHECK(sh.values[0] == -3.0 * 0x1p-14);

    // one more power of two lands on the subnormal grid
    st = {};
    TaggedVector sh2 = compute_step(env, gh, 0x1p16, &st);
    CHECK(st.underflow);
    CHECK(sh2.values[0] == -3.0 * 0x1p-16);

    st = {};
    TaggedVector tiny{{0x1p-24}, kHalf};
    TaggedVector sz = compute_step(env, tiny, 4.0, &st);
    CHECK(sz.values[0] == 0.0);
    CHECK(st.underflow);
}

TEST_CASE("model_decrease examples and Lemma-2 style bounds") {
    TaggedVector g{{1.0, 0.0}, kDouble};
    TaggedVector s = compute_step(env, g, 1.0);
    CHECK(model_decrease(env, g, s).value == 1.0);

    TaggedVector z{{0.0, 0.0}, kDouble};
    CHECK(model_decrease(env, z, compute_step(env, z, 4.0)).value == 0.0);

    long n = 8;
    oracles::FormatRng rng(1300, env, kHalf);
    Rational gamma = oracles::rat(gamma_n(n + 1, env.stack()[kHalf].u()));
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> gv;
        for (long i = 0; i < n; ++i) gv.push_back(rng.normal_value(0.25, 2.0));
        TaggedVector gh{gv, kHalf};
        double sigma = 4.0;
        TaggedVector sh = compute_step(env, gh, sigma);
        TaggedValue dt = model_decrease(env, gh, sh);
        CHECK(dt.value >= 0.0);
        // g~ = -sigma * s, exactly; dt * sigma within gamma_{n+1} of ||g~||^2
        std::vector<double> gtilde;
        for (double sv : sh.values) gtilde.push_back(-sigma * sv);
        Rational gt2 = oracles::rational_norm_sq(gtilde);
        Rational lhs = oracles::rat(dt.value) * oracles::rat(sigma);
        CHECK(lhs >= (Rational(1) - gamma) * gt2);
        CHECK(lhs <= (Rational(1) + gamma) * gt2);
    }
}

TEST_CASE("compute_candidate") {
    TaggedVector x{{1.0}, kHalf};
    TaggedVector s{{0.5}, kHalf};
    TaggedVector c = compute_candidate(env, x, s, kHalf);
    CHECK(c.values[0] == 1.5);
    CHECK(c.fmt == kHalf);

    // binary16 grid spacing at 2048 is 2: the candidate equals the incumbent
    TaggedVector xbig{{2048.0}, kHalf};
    TaggedVector c2 = compute_candidate(env, xbig, s, kHalf);
    CHECK(c2.values[0] == 2048.0);

    // the addition happens in the step's format even when the candidate
    // target is finer; only the subsequent cast is exact
    TaggedVector c3 = compute_candidate(env, xbig, s, kDouble);
    CHECK(c3.values[0] == 2048.0);
    CHECK(c3.fmt == kDouble);
    TaggedVector c4 = compute_candidate(env, x, s, kDouble);
    CHECK(c4.values[0] == 1.5);
    CHECK(c4.fmt == kDouble);
}

TEST_CASE("stopping_threshold") {
    DefinedReal eps(1.5e-8);
    CHECK(stopping_threshold(eps, DefinedReal(0.0), DefinedReal(0.0)) == eps);
    DefinedReal thr = stopping_threshold(eps, DefinedReal(0.2), DefinedReal(9.77e-4));
    DefinedReal expect = eps / (DefinedReal(1.000977) * DefinedReal(1.2));
    CHECK(abs(thr - expect) < DefinedReal(1e-20));
    CHECK(thr < eps);
}

TEST_CASE("update_sigma") {
    SolverConfig cfg = defaults();
    cfg.sigma_min = 0x1p-10;
    CHECK(update_sigma(4.0, DefinedReal(0.05), cfg) == 8.0);   // rejected
    CHECK(update_sigma(4.0, DefinedReal(0.8), cfg) == 2.0);    // very successful
    CHECK(update_sigma(4.0, DefinedReal(0.5), cfg) == 4.0);    // successful
    CHECK(update_sigma(0x1p-10, DefinedReal(0.9), cfg) == 0x1p-10);  // floor

    bool ovf = false;
    update_sigma(0x1p1023, DefinedReal(-1.0), cfg, &ovf);
    CHECK(ovf);
}

TEST_CASE("one-dimensional quadratic follows the closed-form recurrence") {
    Problem p = one_dim_half_quadratic();
    for (double sigma0 : {1.0, 4.0, 16.0}) {
        SolverConfig cfg = exact_double_config();
        cfg.sigma0 = sigma0;
        RunReport rep = run_mpr2(p, cfg);
        CHECK(rep.status == RunStatus::FirstOrder);
        CHECK(rep.invariant_violations == 0);

        // independent recurrence: x' = x (1 - 1/sigma), rho = 1 - 1/(2 sigma)
        double x = 1.0, sigma = sigma0;
        for (const auto& rec : rep.trace) {
            if (rec.x.empty()) break;  // terminating record
            double rho = 1.0 - 1.0 / (2.0 * sigma);
            double x_next = rho < cfg.eta1 ? x : x * (1.0 - 1.0 / sigma);
            CHECK(rec.x[0] == x_next);
            if (rho >= cfg.eta2) sigma = std::max(cfg.sigma_min, cfg.gamma1 * sigma);
            else if (rho < cfg.eta1) sigma = cfg.gamma3 * sigma;
            x = x_next;
        }
        CHECK(x == 0.0);
    }
}

TEST_CASE("exact-mode mpr2 and r2 produce identical iterates") {
    for (const char* name : {"rosenbrock", "himmelblau", "quartic"}) {
        Problem p = get_problem(name, name[0] == 'q' ? 4 : 2);
        SolverConfig mp_cfg = exact_double_config();
        mp_cfg.max_iter = 400;

        SolverConfig r2_cfg;
        r2_cfg.mode = SolverMode::R2;
        r2_cfg.keep_iterates = true;
        r2_cfg.max_iter = 400;

        RunReport a = run_mpr2(p, mp_cfg);
        RunReport b = run_r2(p, r2_cfg);
        CHECK(a.status == b.status);
        REQUIRE(a.trace.size() == b.trace.size());
        for (std::size_t i = 0; i < a.trace.size(); ++i) {
            CHECK(a.trace[i].x == b.trace[i].x);
            CHECK(a.trace[i].sigma == b.trace[i].sigma);
        }
    }
}

TEST_CASE("r2 solves the convex quadratics to first order") {
    for (const char* name : {"quadratic", "sumsquares", "tridia"}) {
        Problem p = get_problem(name, 10);
        SolverConfig cfg;
        cfg.mode = SolverMode::R2;
        RunReport rep = run_r2(p, cfg);
        CHECK(rep.status == RunStatus::FirstOrder);
        CHECK(rep.gnorm_final <= cfg.eps);
        CHECK(rep.invariant_violations == 0);
        // soundness: reference gradient norm at the exit point
        CHECK(rep.final_grad_norm_reference <= DefinedReal(cfg.eps));
    }
}

TEST_CASE("guaranteed mpr2 solves quadratics and uses low formats early") {
    Problem p = get_problem("quadratic", 10);
    SolverConfig cfg;
    cfg.mode = SolverMode::Mpr2Guaranteed;
    RunReport rep = run_mpr2(p, cfg);
    CHECK(rep.status == RunStatus::FirstOrder);
    CHECK(rep.invariant_violations == 0);
    CHECK(rep.final_grad_norm_reference <= DefinedReal(cfg.eps));
    // multi-precision actually happened: more than one format saw evaluations
    int used = 0;
    for (const auto& f : rep.counters.per_format)
        if (f.obj + f.grad > 0) ++used;
    CHECK(used >= 2);
}

TEST_CASE("guaranteed mpr2 fails on an objective with nonzero minimum value") {
    Problem p = get_problem("quadratic_offset", 5);
    SolverConfig cfg;
    cfg.mode = SolverMode::Mpr2Guaranteed;
    RunReport rep = run_mpr2(p, cfg);
    CHECK(rep.status == RunStatus::PrecisionFailure);
    CHECK(rep.invariant_violations == 0);
}

TEST_CASE("relaxed mpr2 keeps going at the top format") {
    Problem p = get_problem("quadratic_offset", 5);
    SolverConfig cfg;
    cfg.mode = SolverMode::Mpr2Relaxed;
    RunReport rep = run_mpr2(p, cfg);
    // never a precision failure by construction
    CHECK(rep.status != RunStatus::PrecisionFailure);
}

TEST_CASE("gradient evaluations escalate past binary16 under mu pressure") {
    Problem p = get_problem("rosenbrock", 2);
    SolverConfig cfg;
    cfg.mode = SolverMode::Mpr2Guaranteed;
    cfg.max_iter = 600;
    RunReport rep = run_mpr2(p, cfg);
    CHECK(rep.invariant_violations == 0);
    bool escalated = false;
    for (const auto& rec : rep.trace)
        if (rec.pi_g > 1) escalated = true;
    CHECK(escalated);
}

TEST_CASE("trace stream is valid JSON lines") {
    Problem p = get_problem("quadratic", 4);
    SolverConfig cfg;
    cfg.mode = SolverMode::Mpr2Guaranteed;
    cfg.trace_path = "trace_test.jsonl";
    RunReport rep = run_mpr2(p, cfg);
    std::ifstream in(cfg.trace_path);
    REQUIRE(in.good());
    std::string line;
    long lines = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        CHECK(line.front() == '{');
        CHECK(line.back() == '}');
        CHECK(line.find("\"k\":") != std::string::npos);
        CHECK(line.find("\"pi_g\":") != std::string::npos);
        CHECK(line.find("\"sigma\":") != std::string::npos);
        CHECK(line.find("\"mu\":") != std::string::npos);
        ++lines;
    }
    CHECK(lines == static_cast<long>(rep.trace.size()));
    std::remove(cfg.trace_path.c_str());
}

TEST_CASE("sigma outside the binary16 exponent range forces escalation") {
    // sigma0 huge: representable in double but not in binary16, so the first
    // iteration must escalate the gradient format before computing the step
    Problem p = get_problem("quadratic", 4);
    SolverConfig cfg;
    cfg.mode = SolverMode::Mpr2Guaranteed;
    cfg.sigma0 = 0x1p20;
    RunReport rep = run_mpr2(p, cfg);
    CHECK(rep.invariant_violations == 0);
    REQUIRE(!rep.trace.empty());
    CHECK(rep.trace[0].pi_g >= 2);
}

TEST_CASE("concurrent runs over a shared problem match sequential results") {
    Problem p = get_problem("quadratic", 12);  // shared, immutable
    auto run_one = [&p](SolverMode mode, double sigma0) {
        SolverConfig cfg;
        cfg.mode = mode;
        cfg.sigma0 = sigma0;
        cfg.max_iter = 2000;
        return run_mpr2(p, cfg);
    };

    RunReport seq[4] = {run_one(SolverMode::Mpr2Guaranteed, 1.0),
                        run_one(SolverMode::Mpr2Guaranteed, 8.0),
                        run_one(SolverMode::Mpr2Relaxed, 1.0),
                        run_one(SolverMode::R2, 1.0)};

    RunReport par[4];
    {
        std::thread t0([&] { par[0] = run_one(SolverMode::Mpr2Guaranteed, 1.0); });
        std::thread t1([&] { par[1] = run_one(SolverMode::Mpr2Guaranteed, 8.0); });
        std::thread t2([&] { par[2] = run_one(SolverMode::Mpr2Relaxed, 1.0); });
        std::thread t3([&] { par[3] = run_one(SolverMode::R2, 1.0); });
        t0.join();
        t1.join();
        t2.join();
        t3.join();
    }
    for (int i = 0; i < 4; ++i) {
        CHECK(par[i].status == seq[i].status);
        CHECK(par[i].iterations == seq[i].iterations);
        CHECK(par[i].x_final.values == seq[i].x_final.values);
        CHECK(par[i].counters.total_obj() == seq[i].counters.total_obj());
        CHECK(par[i].counters.total_grad() == seq[i].counters.total_grad());
    }
}

TEST_CASE("rho correction forces more objective precision on a scaled problem") {
    // f = 0.5 x^T x + 2^20: huge objective values next to a small decrease
    ExprBuilder b(3);
    std::vector<std::int32_t> terms;
    for (int i = 0; i < 3; ++i)
        terms.push_back(b.mul(b.lit(0.5), b.ipow(b.var(i), 2)));
    Problem p;
    p.name = "offset_large";
    p.n = 3;
    p.expr = b.build(b.add(b.sum(terms), b.lit(0x1p20)));
    p.x0 = {1.0, 1.0, 1.0};
    p.f_low = 0x1p20;

    SolverConfig plain;
    plain.mode = SolverMode::Mpr2Relaxed;
    plain.max_iter = 40;
    SolverConfig corrected = plain;
    corrected.rho_correction = true;

    RunReport a = run_mpr2(p, plain);
    RunReport c = run_mpr2(p, corrected);
    auto min_obj_fmt = [](const RunReport& r) {
        for (std::size_t i = 0; i < r.counters.per_format.size(); ++i)
            if (r.counters.per_format[i].obj > 0) return static_cast<int>(i) + 1;
        return 0;
    };
    // the corrected run must not use a coarser lowest objective format
    CHECK(min_obj_fmt(c) >= min_obj_fmt(a));
    // and the tightened condition shifts evaluations upward overall
    long coarse_a = a.counters.at(1).obj + a.counters.at(2).obj;
    long coarse_c = c.counters.at(1).obj + c.counters.at(2).obj;
    CHECK(coarse_c <= coarse_a);
}
