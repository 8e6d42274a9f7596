#include "mpr2/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>

namespace mpr2 {

SolverMode solver_mode_from_name(const std::string& name) {
    if (name == "r2") return SolverMode::R2;
    if (name == "mpr2_guaranteed") return SolverMode::Mpr2Guaranteed;
    if (name == "mpr2_relaxed") return SolverMode::Mpr2Relaxed;
    throw InvalidConfig("unknown solver mode: " + name);
}

std::string solver_mode_name(SolverMode m) {
    switch (m) {
        case SolverMode::R2: return "r2";
        case SolverMode::Mpr2Guaranteed: return "mpr2_guaranteed";
        case SolverMode::Mpr2Relaxed: return "mpr2_relaxed";
    }
    return "?";
}

std::string run_status_name(RunStatus s) {
    switch (s) {
        case RunStatus::FirstOrder: return "first_order";
        case RunStatus::MaxIter: return "max_iter";
        case RunStatus::PrecisionFailure: return "precision_failure";
        case RunStatus::Stalled: return "stalled";
    }
    return "?";
}

namespace {

bool is_power_of_two(double x) {
    if (!(x > 0.0) || !std::isfinite(x)) return false;
    int e;
    return std::frexp(x, &e) == 0.5;
}

} // namespace

std::vector<std::string> validate_params(const SolverConfig& cfg) {
    std::vector<std::string> warnings;
    DefinedReal eta0(cfg.eta0), eta1(cfg.eta1), eta2(cfg.eta2);
    DefinedReal g1(cfg.gamma1), g2(cfg.gamma2), g3(cfg.gamma3);
    DefinedReal kmu(cfg.kappa_mu), half(0.5), one(1.0), zero(0.0);

    if (!(zero < eta1 && eta1 <= eta2 && eta2 < one))
        throw InvalidConfig("parameter condition violated: 0 < eta1 <= eta2 < 1");
    if (!(zero < g1 && g1 < one))
        throw InvalidConfig("parameter condition violated: 0 < gamma1 < 1");
    if (!(one < g2)) {
        if (cfg.allow_published_params && g2 == one)
            warnings.push_back("gamma2 = 1 accepted (published-value override); "
                               "the iteration-count bound is void");
        else
            throw InvalidConfig("parameter condition violated: 1 < gamma2");
    }
    if (!(g2 <= g3))
        throw InvalidConfig("parameter condition violated: gamma2 <= gamma3");
    if (eta0.is_negative())
        throw InvalidConfig("parameter condition violated: eta0 >= 0");
    if (!(eta0 < half * eta1)) {
        if (eta0 == half * eta1)
            warnings.push_back("eta0 = eta1/2 accepted with warning (strict "
                               "inequality required by the convergence analysis)");
        else
            throw InvalidConfig("parameter condition violated: eta0 < eta1/2");
    }
    if (!(kmu > zero))
        throw InvalidConfig("parameter condition violated: kappa_mu > 0");
    if (!(eta0 + half * kmu <= half * (one - eta2)))
        throw InvalidConfig(
            "parameter condition violated: eta0 + kappa_mu/2 <= (1 - eta2)/2");

    if (!is_power_of_two(cfg.sigma0))
        throw InvalidConfig("sigma0 must be an exact power of two");
    if (!is_power_of_two(cfg.sigma_min))
        throw InvalidConfig("sigma_min must be an exact power of two");
    if (cfg.sigma0 < cfg.sigma_min)
        throw InvalidConfig("sigma0 must be at least sigma_min");
    if (!is_power_of_two(cfg.gamma1) || !is_power_of_two(cfg.gamma3))
        throw InvalidConfig("gamma1 and gamma3 must be powers of two so sigma "
                            "stays exactly representable");
    if (!(cfg.eps > 0.0))
        throw InvalidConfig("eps must be positive");
    if (cfg.max_iter < 1)
        throw InvalidConfig("max_iter must be at least 1");
    if (!(cfg.relax_a > 0.0) || cfg.relax_a > 1.0)
        throw InvalidConfig("relax_a must lie in (0, 1]");
    return warnings;
}

TaggedVector compute_step(const FpEnv& env, const TaggedVector& ghat, double sigma,
                          RoundStatus* st) {
    TaggedVector s;
    s.fmt = ghat.fmt;
    s.values.reserve(ghat.size());
    const FpFormat& f = env.stack()[ghat.fmt];
    for (double g : ghat.values) {
        double z = -g / sigma;
        if (!std::isfinite(z)) throw OverflowError("compute_step: overflow");
        double r = f.is_native_double() ? z : env.round_to_format(z, ghat.fmt, st);
        if (st && g != 0.0 && r == 0.0) st->underflow = true;
        if (st && !f.is_native_double() && r != 0.0 && std::fabs(r) < f.min_normal())
            st->underflow = true;
        s.values.push_back(r);
    }
    return s;
}

TaggedValue model_decrease(const FpEnv& env, const TaggedVector& ghat,
                           const TaggedVector& shat, RoundStatus* st) {
    TaggedValue dot = env.fp_dot(ghat, shat, st);
    return {-dot.value, dot.fmt};
}

TaggedVector compute_candidate(const FpEnv& env, const TaggedVector& xhat,
                               const TaggedVector& shat, FormatIndex pi_c,
                               RoundStatus* st) {
    if (xhat.size() != shat.size())
        throw InvalidConfig("compute_candidate: dimension mismatch");
    TaggedVector c;
    c.fmt = shat.fmt;
    c.values.reserve(xhat.size());
    for (std::size_t i = 0; i < xhat.size(); ++i) {
        TaggedValue sum = env.fp_add({xhat.values[i], xhat.fmt},
                                     {shat.values[i], shat.fmt}, st);
        c.values.push_back(sum.value);
    }
    return env.cast(c, pi_c, st);
}

DefinedReal stopping_threshold(const DefinedReal& eps, const DefinedReal& omega_g,
                               const DefinedReal& beta) {
    DefinedReal one(1.0);
    return eps / ((one + beta) * (one + omega_g));
}

double update_sigma(double sigma, const DefinedReal& rho, const SolverConfig& cfg,
                    bool* overflowed) {
    if (overflowed) *overflowed = false;
    double next;
    if (rho >= DefinedReal(cfg.eta2)) {
        next = std::max(cfg.sigma_min, cfg.gamma1 * sigma);
    } else if (rho >= DefinedReal(cfg.eta1)) {
        next = sigma;  // multiplier 1, within [sigma, gamma2 sigma]
    } else {
        next = cfg.gamma3 * sigma;
    }
    if (!std::isfinite(next) || next == 0.0) {
        if (overflowed) *overflowed = true;
        return sigma;
    }
    return next;
}

long EvalCounters::total_obj() const {
    long t = 0;
    for (const auto& f : per_format) t += f.obj;
    return t;
}

long EvalCounters::total_grad() const {
    long t = 0;
    for (const auto& f : per_format) t += f.grad;
    return t;
}

// ---------------------------------------------------------------------------
// Engine
// ---------------------------------------------------------------------------

namespace {

struct TraceWriter {
    std::ofstream out;
    bool enabled = false;

    void open(const std::string& path) {
        if (path.empty()) return;
        out.open(path);
        if (!out) throw IoError("cannot open trace file: " + path);
        enabled = true;
    }

    void write(const IterRecord& r) {
        if (!enabled) return;
        char buf[512];
        std::snprintf(buf, sizeof(buf),
                      "{\"k\":%ld,\"pi_x\":%d,\"pi_g\":%d,\"pi_c\":%d,\"pi_f\":%d,"
                      "\"sigma\":%.17g,\"gnorm\":%.17g,\"delta_t\":%.17g,"
                      "\"mu\":%.17g,\"rho\":%.17g,\"accepted\":%s,\"flags\":%u}",
                      r.k, r.pi_x, r.pi_g, r.pi_c, r.pi_f, r.sigma, r.gnorm,
                      r.delta_t, r.mu, std::isfinite(r.rho) ? r.rho : 0.0,
                      r.accepted ? "true" : "false", r.flags);
        out << buf << "\n";
    }
};

class Engine {
public:
    Engine(const Problem& p, const SolverConfig& cfg)
        : p_(p),
          cfg_(cfg),
          zero_err_(cfg.disable_error_sources || cfg.mode == SolverMode::R2),
          env_(cfg.stack),
          eval_(env_, zero_err_ ? EvalErrorModel::None
                : cfg.mode == SolverMode::Mpr2Guaranteed ? EvalErrorModel::Guaranteed
                : cfg.mode == SolverMode::Mpr2Relaxed    ? EvalErrorModel::Relaxed
                                                         : EvalErrorModel::None),
          ctx_(p.n, cfg.stack, cfg.gamma_formula),
          top_(cfg.stack.highest()) {
        rep_.warnings = validate_params(cfg_);
        rep_.counters = EvalCounters(env_.stack().size());
        trace_.open(cfg_.trace_path);
    }

    RunReport run();

private:
    // defined coefficients, honoring the zero-error switch
    DefinedReal beta_np2(FormatIndex pi) const {
        return zero_err_ ? DefinedReal(0.0) : ctx_.beta_np2(pi);
    }
    DefinedReal u_of(FormatIndex pi) const {
        return zero_err_ ? DefinedReal(0.0) : ctx_.u(pi);
    }
    DefinedReal mu_of(const DefinedReal& omega_g, const DefinedReal& lambda,
                      FormatIndex pi_g) const {
        if (zero_err_)
            return mu_k_raw(DefinedReal(1.0), DefinedReal(0.0), DefinedReal(0.0),
                            omega_g, lambda);
        return mu_k(ctx_, pi_g, omega_g, lambda);
    }

    bool plain_eps_stopping() const {
        return cfg_.mode == SolverMode::R2 || cfg_.mode == SolverMode::Mpr2Relaxed;
    }
    bool guaranteed() const { return eval_.model() == EvalErrorModel::Guaranteed; }
    bool relaxed_never_fails() const {
        return cfg_.mode == SolverMode::Mpr2Relaxed || cfg_.mode == SolverMode::R2;
    }

    bool sigma_fits(FormatIndex pi) const {
        const FpFormat& f = env_.stack()[pi];
        int e = std::ilogb(sigma_);
        return e <= f.emax && e >= f.emin - (f.precision - 1);
    }

    TaggedValue norm_escalated(const TaggedVector& v, unsigned* flags, RoundStatus* st);
    TaggedValue dot_decrease_escalated(const TaggedVector& g, const TaggedVector& s,
                                       unsigned* flags, RoundStatus* st);

    // evaluation wrappers with counting
    ObjectiveEval eval_objective_counted(const TaggedVector& x, FormatIndex pi) {
        rep_.counters.at(pi).obj += 1;
        return eval_.eval_objective(p_, x, pi);
    }
    GradientEval eval_gradient_counted(const TaggedVector& x, FormatIndex pi) {
        rep_.counters.at(pi).grad += 1;
        return eval_.eval_gradient(p_, x, pi);
    }

    void resolve_grad_success() {
        if (pending_grad_) {
            rep_.counters.at(*pending_grad_).grad_success += 1;
            pending_grad_.reset();
        }
    }

    bool objective_suspect(const ObjectiveEval& fe) const;

    // step-0 objective: lowest legal format, escalating on overflow
    bool initial_objective();

    enum class Step12 { Proceed, Terminated };
    std::optional<Step12> step1_and_step2(IterRecord& rec);

    bool select_and_eval_objective(IterRecord& rec);

    DefinedReal rho_correction_term(FormatIndex pi_f_new, double magnitude) const;

    void note_violation(const std::string& what) {
        rep_.invariant_violations += 1;
        if (rep_.invariant_notes.size() < 32) rep_.invariant_notes.push_back(what);
    }
    void online_checks(const IterRecord& rec, const DefinedReal& lambda,
                       const DefinedReal& rho, bool accepted,
                       const std::vector<double>& c_values);
    void post_run_checks();

    void finish(RunStatus status);

    const Problem& p_;
    SolverConfig cfg_;
    bool zero_err_;
    FpEnv env_;
    EvalModel eval_;
    ErrorContext ctx_;
    FormatIndex top_;
    TraceWriter trace_;

    // iterate state
    TaggedVector xhat_;
    FormatIndex pi_x_ = 1;
    double fhat_ = 0.0;
    DefinedReal omega_fx_;
    FormatIndex pi_f_last_ = 1;
    TaggedVector ghat_;
    DefinedReal omega_g_;
    FormatIndex pi_g_ = 1, pi_c_ = 1;
    double sigma_ = 1.0;
    long k_ = 0;
    bool prev_accepted_ = true;
    std::optional<FormatIndex> pending_grad_;

    // per-iteration scratch shared between steps
    TaggedVector shat_;
    TaggedValue gnorm_fl_{0.0, 1};
    DefinedReal phi_, lambda_, mu_val_;
    TaggedVector chat_;
    TaggedValue delta_t_{0.0, 1};
    double fplus_ = 0.0;
    DefinedReal omega_fc_;
    FormatIndex pi_f_cand_ = 1;
    bool underflow_this_iter_ = false;

    RunReport rep_;
};

TaggedValue Engine::norm_escalated(const TaggedVector& v, unsigned* flags,
                                   RoundStatus* st) {
    for (FormatIndex nf = v.fmt;; ++nf) {
        try {
            TaggedVector tmp{v.values, nf};
            return env_.fp_norm(tmp, st);
        } catch (const OverflowError&) {
            if (nf >= top_) throw;
            if (flags) *flags |= kFlagOverflowRetry;
        }
    }
}

TaggedValue Engine::dot_decrease_escalated(const TaggedVector& g, const TaggedVector& s,
                                           unsigned* flags, RoundStatus* st) {
    for (FormatIndex nf = std::max(g.fmt, s.fmt);; ++nf) {
        try {
            TaggedVector gt{g.values, nf}, st2{s.values, nf};
            return model_decrease(env_, gt, st2, st);
        } catch (const OverflowError&) {
            if (nf >= top_) throw;
            if (flags) *flags |= kFlagOverflowRetry;
        }
    }
}

// An evaluation whose rounded pass underflowed into the subnormal range of
// its own result carries unbounded relative error; the relaxed model would
// not see it, so such values are never trusted below the top format.
bool Engine::objective_suspect(const ObjectiveEval& fe) const {
    return fe.status.underflow &&
           std::fabs(fe.value.value) < env_.stack()[fe.fmt].min_normal();
}

bool Engine::initial_objective() {
    for (FormatIndex pi = pi_x_;; ++pi) {
        try {
            ObjectiveEval fe = eval_objective_counted(xhat_, pi);
            if (objective_suspect(fe) && pi < top_) continue;
            rep_.counters.at(pi).obj_success += 1;
            fhat_ = fe.value.value;
            omega_fx_ = fe.omega;
            pi_f_last_ = pi;
            return true;
        } catch (const OverflowError&) {
            if (pi >= top_) {
                finish(RunStatus::PrecisionFailure);
                return false;
            }
        }
    }
}

// Step 1 (gradient evaluation and termination test) and Step 2 (step, phi,
// mu loop, candidate, model decrease). Returns nullopt when the run must end
// with the status already recorded in rep_.
std::optional<Engine::Step12> Engine::step1_and_step2(IterRecord& rec) {
    bool need_grad = (k_ == 0 || prev_accepted_);
    DefinedReal eps_dd(cfg_.eps);

    while (true) {
        // --- Step 1: gradient (re)evaluation ---
        if (need_grad) {
            pi_g_ = std::max(pi_g_, pi_x_);
            try {
                GradientEval ge = eval_gradient_counted(xhat_, pi_g_);
                pending_grad_ = pi_g_;
                ghat_ = ge.grad;
                omega_g_ = ge.omega;
            } catch (const ZeroGradientBoundError& z) {
                // gradient is exactly zero but the enclosure radius is not
                if (z.radius_norm <= eps_dd) {
                    rep_.counters.at(pi_g_).grad_success += 1;
                    ghat_ = TaggedVector{std::vector<double>(xhat_.size(), 0.0), pi_g_};
                    gnorm_fl_ = {0.0, pi_g_};
                    finish(RunStatus::FirstOrder);
                    return std::nullopt;
                }
                if (pi_g_ < top_) {
                    pi_g_ += 1;
                    rec.flags |= kFlagMuEscalated;
                    continue;
                }
                finish(RunStatus::PrecisionFailure);
                return std::nullopt;
            } catch (const OverflowError&) {
                if (pi_g_ < top_) {
                    pi_g_ += 1;
                    rec.flags |= kFlagOverflowRetry;
                    continue;
                }
                finish(RunStatus::PrecisionFailure);
                return std::nullopt;
            }
            need_grad = false;
        }

        // --- Step 1: termination test ---
        RoundStatus norm_st;
        gnorm_fl_ = norm_escalated(ghat_, &rec.flags, &norm_st);
        rec.gnorm = gnorm_fl_.value;
        bool norm_underflow = norm_st.underflow;
        if (norm_underflow) rec.flags |= kFlagNormUnderflow;

        // a nonzero gradient whose computed norm landed on the subnormal grid
        // (or flushed to zero) cannot support the stopping test or phi; spend
        // precision instead of trusting it
        bool g_all_zero = true;
        for (double g : ghat_.values)
            if (g != 0.0) g_all_zero = false;
        if (!g_all_zero && pi_g_ < top_ &&
            std::fabs(gnorm_fl_.value) < env_.stack()[gnorm_fl_.fmt].min_normal()) {
            pending_grad_.reset();
            pi_g_ += 1;
            need_grad = true;
            rec.flags |= kFlagNormUnderflow;
            continue;
        }

        DefinedReal thr = plain_eps_stopping()
                              ? eps_dd
                              : stopping_threshold(eps_dd, omega_g_,
                                                   beta_np2(gnorm_fl_.fmt));
        if (DefinedReal(gnorm_fl_.value) <= thr) {
            bool sound = true;
            if (guaranteed() && norm_underflow) {
                // the norm-error lemma assumes no underflow; fall back to a
                // reference-precision certificate
                DefinedReal g2(0.0);
                for (double g : ghat_.values) g2 += DefinedReal(g) * DefinedReal(g);
                DefinedReal certified = sqrt(g2) * (DefinedReal(1.0) + omega_g_) *
                                        (DefinedReal(1.0) + DefinedReal(0x1p-90));
                sound = certified <= eps_dd;
            }
            if (sound) {
                resolve_grad_success();
                finish(RunStatus::FirstOrder);
                return std::nullopt;
            }
        }

        // --- Step 2: sigma representability in the gradient format ---
        if (!sigma_fits(pi_g_)) {
            if (pi_g_ < top_) {
                pending_grad_.reset();  // discarded for a higher-precision retry
                pi_g_ += 1;
                need_grad = true;
                rec.flags |= kFlagSigmaRangeEscalated;
                continue;
            }
            finish(RunStatus::Stalled);
            return std::nullopt;
        }

        // --- Step 2: step and phi ---
        RoundStatus step_st;
        try {
            shat_ = compute_step(env_, ghat_, sigma_, &step_st);
        } catch (const OverflowError&) {
            if (pi_g_ < top_) {
                pending_grad_.reset();
                pi_g_ += 1;
                need_grad = true;
                rec.flags |= kFlagOverflowRetry;
                continue;
            }
            finish(RunStatus::PrecisionFailure);
            return std::nullopt;
        }
        if (step_st.underflow) rec.flags |= kFlagStepUnderflow;

        TaggedValue norm_x = norm_escalated(xhat_, &rec.flags, &step_st);
        TaggedValue norm_s = norm_escalated(shat_, &rec.flags, &step_st);
        if (norm_s.value == 0.0) {
            // the whole step flushed to zero in the gradient format; a finer
            // format has both more precision and more range
            if (pi_g_ < top_) {
                pending_grad_.reset();
                pi_g_ += 1;
                need_grad = true;
                rec.flags |= kFlagStepUnderflow;
                continue;
            }
            finish(RunStatus::Stalled);
            return std::nullopt;
        }
        TaggedValue phi_hat = env_.fp_div(norm_x, norm_s);
        if (zero_err_) {
            phi_ = DefinedReal(phi_hat.value);
        } else {
            DefinedReal one(1.0);
            phi_ = DefinedReal(phi_hat.value) *
                   ((one + beta_np2(norm_x.fmt)) / (one - beta_np2(norm_s.fmt))) *
                   (one + u_of(phi_hat.fmt));
        }
        if (step_st.underflow) underflow_this_iter_ = true;

        // --- Step 2: mu loop ---
        bool re_eval_grad = false;
        while (true) {
            DefinedReal up = zero_err_ ? DefinedReal(0.0)
                                       : u_prime(ctx_.u(pi_g_), ctx_.u(pi_c_));
            lambda_ = lambda_k(phi_, up);
            mu_val_ = mu_of(omega_g_, lambda_, pi_g_);
            if (DefinedReal(cfg_.relax_a) * mu_val_ <= DefinedReal(cfg_.kappa_mu))
                break;
            if (pi_c_ < pi_g_) {
                pi_c_ += 1;
                rec.flags |= kFlagMuEscalated;
                continue;
            }
            if (pi_g_ < top_) {
                pending_grad_.reset();
                pi_g_ += 1;
                need_grad = true;
                re_eval_grad = true;
                rec.flags |= kFlagMuEscalated;
                break;
            }
            // no format pair satisfies the condition
            if (!relaxed_never_fails()) {
                finish(RunStatus::PrecisionFailure);
                return std::nullopt;
            }
            break;  // relaxed variant proceeds at the top formats
        }
        if (re_eval_grad) continue;

        // --- Step 2: candidate and model decrease ---
        RoundStatus cand_st;
        try {
            chat_ = compute_candidate(env_, xhat_, shat_, pi_c_, &cand_st);
        } catch (const OverflowError&) {
            // retry the downcast at progressively higher candidate formats
            bool fixed = false;
            while (pi_c_ < pi_g_) {
                pi_c_ += 1;
                rec.flags |= kFlagOverflowRetry;
                try {
                    chat_ = compute_candidate(env_, xhat_, shat_, pi_c_, &cand_st);
                    fixed = true;
                    break;
                } catch (const OverflowError&) {
                }
            }
            if (!fixed) {
                // the addition itself overflowed in the gradient format
                if (pi_g_ < top_) {
                    pending_grad_.reset();
                    pi_g_ += 1;
                    need_grad = true;
                    rec.flags |= kFlagOverflowRetry;
                    continue;
                }
                finish(RunStatus::PrecisionFailure);
                return std::nullopt;
            }
        }
        if (cand_st.underflow) underflow_this_iter_ = true;

        // candidate computation underflow: the step was lost in the downcast
        // or in the addition itself; recover precision while any remains
        while (chat_.values == xhat_.values && pi_c_ < pi_g_) {
            pi_c_ += 1;
            rec.flags |= kFlagStepUnderflow;
            chat_ = compute_candidate(env_, xhat_, shat_, pi_c_, &cand_st);
        }
        if (chat_.values == xhat_.values) {
            if (pi_g_ < top_) {
                pending_grad_.reset();
                pi_g_ += 1;
                need_grad = true;
                rec.flags |= kFlagStepUnderflow;
                continue;
            }
            finish(RunStatus::Stalled);
            return std::nullopt;
        }

        delta_t_ = dot_decrease_escalated(ghat_, shat_, &rec.flags, nullptr);
        if (delta_t_.value < 0.0)
            note_violation("delta_t negative at k=" + std::to_string(k_));
        if (delta_t_.value == 0.0) {
            // every product of the decrease flushed to zero in pi_g
            if (pi_g_ < top_) {
                pending_grad_.reset();
                pi_g_ += 1;
                need_grad = true;
                rec.flags |= kFlagStepUnderflow;
                continue;
            }
            finish(RunStatus::Stalled);
            return std::nullopt;
        }
        return Step12::Proceed;
    }
}

DefinedReal Engine::rho_correction_term(FormatIndex pi_f_new, double magnitude) const {
    if (!cfg_.rho_correction || zero_err_) return DefinedReal(0.0);
    DefinedReal u_rho = min(ctx_.u(pi_f_new), min(ctx_.u(pi_f_last_), ctx_.u(pi_g_)));
    return gamma_n(2, u_rho, cfg_.gamma_formula) * DefinedReal(std::fabs(magnitude));
}

// Step 3: choose the evaluation format for f(c), evaluate, escalate while the
// realized bound violates the condition; then re-evaluate f(x) if its stored
// bound is too loose. Returns false when the run ends (status recorded).
bool Engine::select_and_eval_objective(IterRecord& rec) {
    DefinedReal eta0(cfg_.eta0);
    DefinedReal budget = eta0 * DefinedReal(delta_t_.value);
    DefinedReal u_old = ctx_.u(pi_f_last_);

    // predicted-error format selection for f(c)
    FormatIndex pi = pi_c_;
    if (!zero_err_) {
        DefinedReal fx(std::fabs(fhat_));
        DefinedReal scale(1.0);
        if (fhat_ != 0.0) {
            // |f - delta_t| / |f|: the expected shrink of the objective value
            scale = abs(DefinedReal(fhat_) - DefinedReal(delta_t_.value)) / fx;
        }
        for (; pi <= top_; ++pi) {
            DefinedReal pred = omega_fx_ * scale * (ctx_.u(pi) / u_old);
            double pred_mag = std::fabs(fhat_ - delta_t_.value);
            if (pred + rho_correction_term(pi, pred_mag) <= budget) break;
        }
        if (pi > top_) pi = top_;
    }

    while (true) {
        try {
            ObjectiveEval fe = eval_objective_counted(chat_, pi);
            if (objective_suspect(fe) && pi < top_) {
                pi += 1;
                rec.flags |= kFlagObjEscalated;
                continue;
            }
            DefinedReal realized =
                fe.omega + rho_correction_term(pi, fe.value.value);
            if (realized <= budget || zero_err_) {
                rep_.counters.at(pi).obj_success += 1;
                fplus_ = fe.value.value;
                omega_fc_ = fe.omega;
                pi_f_cand_ = pi;
                break;
            }
            if (pi < top_) {
                pi += 1;
                rec.flags |= kFlagObjEscalated;
                continue;
            }
            if (relaxed_never_fails()) {
                // used despite the failed condition; not re-evaluated
                rep_.counters.at(pi).obj_success += 1;
                fplus_ = fe.value.value;
                omega_fc_ = fe.omega;
                pi_f_cand_ = pi;
                break;
            }
            finish(RunStatus::PrecisionFailure);
            return false;
        } catch (const OverflowError&) {
            if (pi < top_) {
                pi += 1;
                rec.flags |= kFlagOverflowRetry;
                continue;
            }
            finish(RunStatus::PrecisionFailure);
            return false;
        }
    }

    // re-evaluate the incumbent objective when its error bound is too loose
    DefinedReal cond_x = omega_fx_ + rho_correction_term(pi_f_cand_, fhat_);
    if (!(cond_x <= budget) && !zero_err_) {
        if (pi_f_last_ >= top_) {
            if (!relaxed_never_fails()) {
                finish(RunStatus::PrecisionFailure);
                return false;
            }
        } else {
            FormatIndex pim = pi_f_last_ + 1;
            for (; pim <= top_; ++pim) {
                DefinedReal pred = omega_fx_ * (ctx_.u(pim) / u_old);
                if (pred + rho_correction_term(pim, fhat_) <= budget) break;
            }
            if (pim > top_) pim = top_;
            while (true) {
                try {
                    ObjectiveEval fe = eval_objective_counted(xhat_, pim);
                    if (objective_suspect(fe) && pim < top_) {
                        pim += 1;
                        rec.flags |= kFlagObjEscalated;
                        continue;
                    }
                    DefinedReal realized =
                        fe.omega + rho_correction_term(pim, fe.value.value);
                    if (realized <= budget || pim >= top_) {
                        if (realized <= budget) {
                            rep_.counters.at(pim).obj_success += 1;
                        } else if (relaxed_never_fails()) {
                            rep_.counters.at(pim).obj_success += 1;
                        } else {
                            finish(RunStatus::PrecisionFailure);
                            return false;
                        }
                        fhat_ = fe.value.value;
                        omega_fx_ = fe.omega;
                        pi_f_last_ = pim;
                        break;
                    }
                    pim += 1;
                    rec.flags |= kFlagObjEscalated;
                } catch (const OverflowError&) {
                    if (pim < top_) {
                        pim += 1;
                        rec.flags |= kFlagOverflowRetry;
                        continue;
                    }
                    finish(RunStatus::PrecisionFailure);
                    return false;
                }
            }
        }
    }
    return true;
}

void Engine::online_checks(const IterRecord& rec, const DefinedReal& lambda,
                           const DefinedReal& rho, bool accepted,
                           const std::vector<double>& c_values) {
    if (!cfg_.check_invariants) return;
    if (eval_.model() == EvalErrorModel::Relaxed) return;

    if (pi_g_ < pi_x_) note_violation("pi_g < pi_x at k=" + std::to_string(k_));

    if (!zero_err_ &&
        !(DefinedReal(cfg_.relax_a) * mu_val_ <= DefinedReal(cfg_.kappa_mu)))
        note_violation("mu exceeded kappa_mu past step 2 at k=" + std::to_string(k_));

    if (!p_.lipschitz_hint || underflow_this_iter_) return;
    DefinedReal L(*p_.lipschitz_hint);
    DefinedReal one(1.0), half(0.5);
    DefinedReal alpha = zero_err_ ? one : ctx_.alpha_np1(rec.pi_g);
    DefinedReal margin = one - DefinedReal(cfg_.eta2) - DefinedReal(cfg_.eta0) -
                         half * DefinedReal(cfg_.kappa_mu);

    // very-successful implication
    DefinedReal lhs = one / DefinedReal(sigma_);
    DefinedReal rhs = margin / (alpha * L * (one + lambda) * (one + lambda));
    if (lhs <= rhs && !(rho >= DefinedReal(cfg_.eta2)))
        note_violation("very-successful sigma implication failed at k=" +
                       std::to_string(k_));

    // sigma upper bound
    DefinedReal u_min = zero_err_ ? DefinedReal(0.0) : ctx_.u(top_);
    DefinedReal alpha_lo = zero_err_ ? one : ctx_.alpha_np1(top_);
    DefinedReal alpha_hi = zero_err_ ? one : ctx_.alpha_np1(1);
    DefinedReal lambda_max = DefinedReal(cfg_.kappa_mu) * (one - u_min) / alpha_lo;
    DefinedReal sigma_max = DefinedReal(cfg_.gamma3) * L * (one + lambda_max) *
                            (one + lambda_max) * alpha_hi / margin;
    if (DefinedReal(sigma_) > max(sigma_max, DefinedReal(cfg_.sigma0)))
        note_violation("sigma exceeded sigma_max at k=" + std::to_string(k_));

    // accepted guaranteed steps decrease the true objective
    DefinedReal eta1(cfg_.eta1), eta0(cfg_.eta0);
    if (accepted && eta1 > eta0 * DefinedReal(2.0) && guaranteed()) {
        DefinedReal f_old = defined_eval(p_, xhat_.values);  // pre-acceptance x
        DefinedReal f_new = defined_eval(p_, c_values);
        DefinedReal slack = max(abs(f_old), one) * DefinedReal(0x1p-90);
        if (!(f_old - f_new >= -slack))
            note_violation("accepted step did not decrease f at k=" +
                           std::to_string(k_));
    }
}

void Engine::post_run_checks() {
    if (!cfg_.check_invariants) return;
    if (eval_.model() == EvalErrorModel::Relaxed) return;
    if (!p_.lipschitz_hint || !p_.f_low) return;
    DefinedReal eta1(cfg_.eta1), eta0(cfg_.eta0);
    if (!(eta1 > eta0 * DefinedReal(2.0))) return;  // bound void at eta1 = 2 eta0

    DefinedReal one(1.0), half(0.5);
    DefinedReal L(*p_.lipschitz_hint);
    DefinedReal margin = one - DefinedReal(cfg_.eta2) - DefinedReal(cfg_.eta0) -
                         half * DefinedReal(cfg_.kappa_mu);
    DefinedReal u_max = zero_err_ ? DefinedReal(0.0) : ctx_.u(1);
    DefinedReal u_min = zero_err_ ? DefinedReal(0.0) : ctx_.u(top_);
    DefinedReal alpha_lo = zero_err_ ? one : ctx_.alpha_np1(top_);
    DefinedReal alpha_hi = zero_err_ ? one : ctx_.alpha_np1(1);
    DefinedReal beta = zero_err_ ? DefinedReal(0.0) : ctx_.beta_np2(1);
    DefinedReal gamma = zero_err_ ? DefinedReal(0.0) : ctx_.gamma_np1(1);
    DefinedReal lambda_max = DefinedReal(cfg_.kappa_mu) * (one - u_min) / alpha_lo;
    DefinedReal sigma_max = DefinedReal(cfg_.gamma3) * L * (one + lambda_max) *
                            (one + lambda_max) * alpha_hi / margin;
    sigma_max = max(sigma_max, DefinedReal(cfg_.sigma0));

    DefinedReal ratio = ((one + beta) / (one - beta)) *
                        ((one + DefinedReal(cfg_.kappa_mu)) / (one - u_max));
    DefinedReal kappa_s = ratio * ratio * sigma_max /
                          ((eta1 - DefinedReal(2.0) * eta0) * (one - gamma));
    DefinedReal gap = rep_.f0_reference - DefinedReal(*p_.f_low);
    if (gap.is_negative()) gap = DefinedReal(0.0);
    DefinedReal eps_dd(cfg_.eps);
    DefinedReal bound = kappa_s * gap / (eps_dd * eps_dd);
    if (DefinedReal(static_cast<double>(rep_.successful_iterations)) > bound)
        note_violation("successful-iteration count exceeded the complexity bound");
}

void Engine::finish(RunStatus status) {
    resolve_grad_success();  // a surviving evaluation was never discarded
    rep_.status = status;
    rep_.iterations = k_;
    rep_.x_final = xhat_;
    rep_.f_final = fhat_;
    rep_.gnorm_final = gnorm_fl_.value;
    rep_.final_grad_norm_reference = defined_grad_norm(p_, xhat_.values);
}

RunReport Engine::run() {
    // Step 0
    pi_x_ = env_.stack().lowest();
    xhat_ = env_.tag_vector(p_.x0, pi_x_);
    if (static_cast<long>(xhat_.size()) != p_.n)
        throw InvalidConfig("start point dimension mismatch");
    sigma_ = cfg_.sigma0;
    pi_c_ = pi_x_;
    pi_g_ = pi_x_;
    rep_.f0_reference = defined_eval(p_, p_.x0);
    gnorm_fl_ = {std::numeric_limits<double>::infinity(), pi_x_};

    if (!initial_objective()) return rep_;

    for (k_ = 0; k_ < cfg_.max_iter; ++k_) {
        IterRecord rec;
        rec.k = k_;
        underflow_this_iter_ = false;

        auto outcome = step1_and_step2(rec);
        if (!outcome) {
            rec.pi_x = pi_x_;
            rec.pi_g = pi_g_;
            rec.pi_c = pi_c_;
            rec.sigma = sigma_;
            rec.gnorm = gnorm_fl_.value;
            rep_.trace.push_back(rec);
            trace_.write(rec);
            post_run_checks();
            return rep_;
        }
        resolve_grad_success();

        if (!select_and_eval_objective(rec)) {
            rep_.trace.push_back(rec);
            trace_.write(rec);
            post_run_checks();
            return rep_;
        }

        // Step 4: acceptance
        DefinedReal delta_t_dd(delta_t_.value);
        DefinedReal rho = (DefinedReal(fhat_) - DefinedReal(fplus_)) / delta_t_dd;
        bool accepted = rho >= DefinedReal(cfg_.eta1);

        rec.pi_x = pi_x_;
        rec.pi_g = pi_g_;
        rec.pi_c = pi_c_;
        rec.pi_f = pi_f_cand_;
        rec.sigma = sigma_;
        rec.delta_t = delta_t_.value;
        rec.mu = mu_val_.to_double();
        rec.rho = rho.to_double();
        rec.accepted = accepted;

        online_checks(rec, lambda_, rho, accepted, chat_.values);

        if (accepted) {
            xhat_ = chat_;
            pi_x_ = pi_c_;
            fhat_ = fplus_;
            omega_fx_ = omega_fc_;
            pi_f_last_ = pi_f_cand_;
            rep_.successful_iterations += 1;
            // next-iteration format selection
            pi_c_ = std::max(1, pi_f_cand_ - 1);
            pi_g_ = std::max(pi_c_, pi_x_);
        }
        // on rejection the previous formats are kept

        if (cfg_.keep_iterates) rec.x = xhat_.values;
        rep_.trace.push_back(rec);
        trace_.write(rec);

        // Step 5: regularization update
        bool sigma_overflow = false;
        sigma_ = update_sigma(sigma_, rho, cfg_, &sigma_overflow);
        if (sigma_overflow) {
            k_ += 1;
            finish(RunStatus::Stalled);
            post_run_checks();
            return rep_;
        }
        prev_accepted_ = accepted;
    }

    finish(RunStatus::MaxIter);
    post_run_checks();
    return rep_;
}

} // namespace

RunReport run_mpr2(const Problem& p, const SolverConfig& cfg) {
    if (cfg.mode == SolverMode::R2) return run_r2(p, cfg);
    Engine engine(p, cfg);
    RunReport rep = engine.run();
    return rep;
}

RunReport run_r2(const Problem& p, const SolverConfig& cfg) {
    SolverConfig r2cfg = cfg;
    r2cfg.mode = SolverMode::R2;
    r2cfg.stack = cfg.stack.finest_only();
    Engine engine(p, r2cfg);
    return engine.run();
}

} // namespace mpr2
