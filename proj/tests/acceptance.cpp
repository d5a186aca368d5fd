// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one pass/fail line per criterion. Exits nonzero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sosg/json_io.hpp"
#include "sosg/optionlab.hpp"
#include "sosg/updating.hpp"
#include "testutil.hpp"

using namespace sosg;
using testutil::upoly;

namespace {

const std::string kData = SOSG_DATA_DIR;

double now_s() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

struct Criterion {
    std::string name;
    std::function<bool(std::ostringstream&)> run;
};

std::vector<PiecewisePolynomial> markov_gambles(double m) {
    Polynomial g = upoly({-m, 1.0});
    return {PiecewisePolynomial::from_polynomial(g),
            PiecewisePolynomial::from_polynomial(-g)};
}

Polynomial quartic_sos() {
    Polynomial::TermMap t;
    t[Monomial({4, 0})] = 4.0;
    t[Monomial({3, 1})] = 4.0;
    t[Monomial({2, 2})] = -3.0;
    t[Monomial({0, 4})] = 5.0;
    return Polynomial::from_terms(2, std::move(t));
}

Polynomial non_sos_positive() {
    Polynomial::TermMap t;
    t[Monomial({0, 0})] = 1.0;
    t[Monomial({4, 2})] = 1.0;
    t[Monomial({2, 4})] = 1.0;
    t[Monomial({2, 2})] = -1.0;
    return Polynomial::from_terms(2, std::move(t));
}

Polynomial non_sos_factored() {
    Polynomial x1 = Polynomial::variable(2, 0), x2 = Polynomial::variable(2, 1);
    return x1 * x1 * x2 * x2 * (x1 * x1 + x2 * x2 - Polynomial::constant(2, 1.0)) +
           Polynomial::constant(2, 1.0);
}

bool criterion_markov(std::ostringstream& why) {
    const std::tuple<double, double, double> cases[] = {
        {2.0, 5.0, 10.0}, {1.0, 4.0, 8.0}, {3.0, 4.0, 10.0}};
    for (auto [m, u, xmax] : cases) {
        const double t0 = now_s();
        PrevisionResult r =
            pw_upper_prevision(0.0, xmax, markov_gambles(m), indicator_at_least(u), 2);
        const double dt = now_s() - t0;
        const double want = std::min(1.0, m / u);
        if (r.status != PrevisionStatus::Value) {
            why << "(m,u)=(" << m << "," << u << ") not solved";
            return false;
        }
        if (std::fabs(r.value - want) > 1e-4) {
            why << "(m,u)=(" << m << "," << u << ") got " << r.value << " want " << want;
            return false;
        }
        if (dt >= 2.0) {
            why << "solve took " << dt << " s";
            return false;
        }
    }
    return true;
}

bool criterion_covariance(std::ostringstream& why) {
    const std::tuple<double, double, double, double> cases[] = {{0, 0, 1, 1},
                                                                {1, -2, 0.5, 3}};
    for (auto [m1, m2, s1, s2] : cases) {
        AssessmentSet a;
        a.omega = SemiAlgebraicSet::reals(2);
        a.degree = 1;
        Polynomial x1 = Polynomial::variable(2, 0), x2 = Polynomial::variable(2, 1);
        auto pm = [&](const Polynomial& g) {
            a.gambles.push_back(g);
            a.gambles.push_back(-g);
        };
        pm(x1 - Polynomial::constant(2, m1));
        pm(x2 - Polynomial::constant(2, m2));
        pm(x1 * x1 - Polynomial::constant(2, m1 * m1 + s1 * s1));
        pm(x2 * x2 - Polynomial::constant(2, m2 * m2 + s2 * s2));
        Polynomial f = (x1 - Polynomial::constant(2, m1)) * (x2 - Polynomial::constant(2, m2));
        PrevisionResult lo = lower_prevision(a, f);
        PrevisionResult hi = upper_prevision(a, f);
        if (lo.status != PrevisionStatus::Value || hi.status != PrevisionStatus::Value) {
            why << "not solved";
            return false;
        }
        if (std::fabs(lo.value + s1 * s2) > 1e-4 || std::fabs(hi.value - s1 * s2) > 1e-4) {
            why << "got [" << lo.value << ", " << hi.value << "] want [" << -s1 * s2 << ", "
                << s1 * s2 << "]";
            return false;
        }
    }
    return true;
}

bool criterion_asl(std::ostringstream& why) {
    auto check = [&](double m, bool avoids) {
        AssessmentSet a;
        a.omega = SemiAlgebraicSet::interval(0.0, 10.0);
        a.degree = 1;
        Polynomial g = upoly({-m, 1.0});
        a.gambles = {g, -g};
        AslResult r = avoids_sure_loss(a);
        const double target = avoids ? 0.0 : 1.0;
        if (std::fabs(r.lambda0 - target) > 0.01) {
            why << "m=" << m << " lambda0=" << r.lambda0 << "; ";
            return false;
        }
        const bool got_avoids = r.outcome == AslResult::Outcome::Avoids;
        if (got_avoids != avoids) {
            why << "m=" << m << " wrong verdict; ";
            return false;
        }
        return true;
    };
    bool ok = true;
    for (double m : {0.1, 5.0, 9.9}) ok = check(m, true) && ok;
    for (double m : {-1.0, 11.0}) ok = check(m, false) && ok;
    return ok;
}

bool criterion_sos_classification(std::ostringstream& why) {
    auto q = sos_decompose(upoly({0.25, -1.0, 1.0}), 1);
    if (q.outcome != CertOutcome::Certified) {
        why << "1/4-x+x^2 not certified; ";
        return false;
    }
    Polynomial rec = gram_to_poly(*q.gram);
    if ((rec - upoly({0.25, -1.0, 1.0})).max_abs_coefficient() > 1e-6 ||
        sym_min_eig(q.gram->Q) < -1e-7) {
        why << "bad Gram for 1/4-x+x^2; ";
        return false;
    }
    if (sos_decompose(quartic_sos(), 2).outcome != CertOutcome::Certified) {
        why << "quartic not certified; ";
        return false;
    }
    if (sos_decompose(non_sos_positive(), 3).outcome != CertOutcome::NotCertified) {
        why << "non-SOS #1 not refuted; ";
        return false;
    }
    if (sos_decompose(non_sos_factored(), 3).outcome != CertOutcome::NotCertified) {
        why << "non-SOS #2 not refuted; ";
        return false;
    }
    return true;
}

bool criterion_moment_counterexample(std::ostringstream& why) {
    MomentVector y = MomentVector::zero(2, 3);
    const MonomialBasis full = monomial_basis(2, 6);
    auto set = [&](int a, int b, double v) { y.y[full.index_of(Monomial({a, b}))] = v; };
    set(0, 0, 1.0);
    set(2, 0, 353.0);
    set(0, 2, 353.0);
    set(4, 0, 249572.0);
    set(0, 4, 249572.0);
    set(2, 2, 66.0);
    set(6, 0, 706955894.0);
    set(0, 6, 706955894.0);
    set(4, 2, 17.0);
    set(2, 4, 17.0);
    Mat M = moment_matrix(y);
    double norm = 0.0;
    for (double v : M.a) norm = std::max(norm, std::fabs(v));
    if (sym_min_eig(M) < -1e-6 * norm) {
        why << "moment matrix not psd";
        return false;
    }
    const double L = apply_functional(y, non_sos_positive());
    if (std::fabs(L + 31.0) > 1e-9 * 31.0) {
        why << "L(f)=" << L << " want -31";
        return false;
    }
    return true;
}

bool criterion_unbounded(std::ostringstream& why) {
    AssessmentSet a;
    a.omega = SemiAlgebraicSet::reals(1);
    a.degree = 2;
    Polynomial g1 = upoly({-1.0, 1.0}), g2 = upoly({-1.0, 0.0, 1.0});
    a.gambles = {g1, -g1, g2, -g2};
    PrevisionResult r = upper_prevision(a, upoly({0, 0, 0, 0, 1.0}));
    if (r.status != PrevisionStatus::Unbounded) {
        why << "status " << status_name(r.status);
        return false;
    }
    return true;
}

bool criterion_convergence(std::ostringstream& why) {
    std::mt19937 rng(90210);
    int closed = 0;
    for (int rep = 0; rep < 25; ++rep) {
        auto inst = testutil::random_instance(rng, 4, 4, 4);
        std::vector<PiecewisePolynomial> G;
        for (const auto& g : inst.assess.gambles)
            G.push_back(PiecewisePolynomial::from_polynomial(g));
        LpResult oracle = lp_lower_prevision(inst.a, inst.b, G,
                                             PiecewisePolynomial::from_polynomial(inst.f),
                                             8001);
        if (oracle.status != PrevisionStatus::Value) {
            why << "rep " << rep << ": oracle failed";
            return false;
        }
        double prev = -1e300;
        double at4 = -1e300;
        for (int d : {2, 3, 4}) {
            AssessmentSet a = inst.assess;
            a.degree = d;
            PrevisionResult r = lower_prevision(a, inst.f);
            double v;
            if (r.status == PrevisionStatus::Value)
                v = r.value;
            else if (r.status == PrevisionStatus::InfeasibleAssessments)
                v = -1e300;  // empty feasible set: supremum -inf
            else {
                why << "rep " << rep << " d=" << d << ": " << status_name(r.status);
                return false;
            }
            if (v < prev - 1e-7) {
                why << "rep " << rep << ": value decreased in d";
                return false;
            }
            if (v > oracle.value + 1e-5) {
                why << "rep " << rep << " d=" << d << ": " << v << " above oracle "
                    << oracle.value;
                return false;
            }
            prev = v;
            if (d == 4) at4 = v;
        }
        if (oracle.value - at4 <= 1e-3) ++closed;
    }
    if (closed < 20) {
        why << "only " << closed << "/25 closed the gap by d=4";
        return false;
    }
    return true;
}

bool criterion_case_study(std::ostringstream& why) {
    const double t0 = now_s();
    OptionChain chain = load_option_chain_file(kData + "/table1.csv");
    std::vector<double> cs = threshold_grid(2400.0, 2800.0, 10.0);
    ProbabilityCurve curve = probability_curve(chain, 2000.0, 3200.0, cs, 2);
    if (!curve.all_values()) {
        why << "curve has unsolved points";
        return false;
    }
    double prev_lo = 1.0 + 1e-9, prev_hi = 1.0 + 1e-9;
    for (const auto& p : curve.points) {
        if (p.lower < -1e-6 || p.upper > 1.0 + 1e-6 || p.lower > p.upper + 1e-6) {
            why << "bounds violated at c=" << p.c;
            return false;
        }
        if (p.lower > prev_lo + 1e-5 || p.upper > prev_hi + 1e-5) {
            why << "monotonicity violated at c=" << p.c;
            return false;
        }
        prev_lo = p.lower;
        prev_hi = p.upper;
    }
    ProbabilityCurve ref = oracle_curve(chain, 2000.0, 3200.0, cs, 8001);
    if (!ref.all_values()) {
        why << "oracle curve has unsolved points";
        return false;
    }
    double gap = 0.0;
    for (size_t i = 0; i < cs.size(); ++i) {
        gap = std::max(gap, std::fabs(curve.points[i].lower - ref.points[i].lower));
        gap = std::max(gap, std::fabs(curve.points[i].upper - ref.points[i].upper));
    }
    if (gap > 5e-3) {
        why << "max oracle gap " << gap;
        return false;
    }
    const double dt = now_s() - t0;
    if (dt >= 600.0) {
        why << "took " << dt << " s";
        return false;
    }
    return true;
}

bool criterion_conditioning(std::ostringstream& why) {
    std::mt19937 rng(1796);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int done = 0;
    for (int attempt = 0; attempt < 40 && done < 10; ++attempt) {
        auto inst = testutil::random_instance(rng, 2, 2);
        const double s = inst.a + (inst.b - inst.a) * (0.15 + 0.6 * u(rng));
        Event tail{{Polynomial::variable(1, 0) - Polynomial::constant(1, s)}};
        ConditionalResult p = conditional_lower_prevision(inst.assess, tail, inst.f);
        if (p.status != PrevisionStatus::Value) continue;
        ConditionalDualResult q = conditional_dual(inst.assess, tail, inst.f);
        if (q.status != PrevisionStatus::Value) {
            why << "dual failed where primal solved";
            return false;
        }
        if (std::fabs(p.value - q.value) > 1e-5 * (1.0 + std::fabs(p.value))) {
            why << "primal/dual differ: " << p.value << " vs " << q.value;
            return false;
        }
        std::vector<PiecewisePolynomial> G;
        for (const auto& g : inst.assess.gambles)
            G.push_back(PiecewisePolynomial::from_polynomial(g));
        LpResult oracle = lp_conditional(inst.a, inst.b, G, s, inst.b,
                                         PiecewisePolynomial::from_polynomial(inst.f), 8001);
        if (oracle.status != PrevisionStatus::Value) continue;
        if (p.value > oracle.value + 1e-5) {
            why << "conditional " << p.value << " above oracle " << oracle.value;
            return false;
        }
        ++done;
    }
    if (done < 10) {
        why << "only " << done << "/10 instances produced values";
        return false;
    }
    return true;
}

bool criterion_coherence(std::ostringstream& why) {
    std::mt19937 rng(8128);
    std::uniform_real_distribution<double> u(0.2, 3.0);
    // the 1e-6 property tolerances presume near-exact optima
    SdpSettings tight;
    tight.gap_tol = 1e-9;
    int conj = 0, homog = 0, shift = 0, superadd = 0;
    for (int rep = 0; rep < 200 && std::min(std::min(conj, homog), std::min(shift, superadd)) < 50;
         ++rep) {
        auto inst = testutil::random_instance(rng, 2);
        if (conj < 50) {
            PrevisionResult up = upper_prevision(inst.assess, inst.f, tight);
            PrevisionResult lo = lower_prevision(inst.assess, -inst.f, tight);
            if (up.status == PrevisionStatus::Value && lo.status == PrevisionStatus::Value) {
                if (std::fabs(up.value + lo.value) > 1e-6) {
                    why << "conjugacy off by " << std::fabs(up.value + lo.value);
                    return false;
                }
                ++conj;
            }
        }
        PrevisionResult base = lower_prevision(inst.assess, inst.f, tight);
        if (base.status != PrevisionStatus::Value) continue;
        if (homog < 50) {
            const double alpha = u(rng);
            PrevisionResult scaled = lower_prevision(inst.assess, inst.f * alpha, tight);
            if (scaled.status == PrevisionStatus::Value) {
                if (std::fabs(scaled.value - alpha * base.value) > 1e-6) {
                    why << "homogeneity off by "
                        << std::fabs(scaled.value - alpha * base.value);
                    return false;
                }
                ++homog;
            }
        }
        if (shift < 50) {
            const double kappa = u(rng) - 1.5;
            PrevisionResult moved =
                lower_prevision(inst.assess, inst.f + Polynomial::constant(1, kappa), tight);
            if (moved.status == PrevisionStatus::Value) {
                if (std::fabs(moved.value - base.value - kappa) > 1e-6) {
                    why << "shift off by " << std::fabs(moved.value - base.value - kappa);
                    return false;
                }
                ++shift;
            }
        }
        if (superadd < 50) {
            Polynomial f2 = testutil::random_upoly(3, rng);
            PrevisionResult other = lower_prevision(inst.assess, f2, tight);
            PrevisionResult sum = lower_prevision(inst.assess, inst.f + f2, tight);
            if (other.status == PrevisionStatus::Value &&
                sum.status == PrevisionStatus::Value) {
                if (sum.value < base.value + other.value - 1e-6) {
                    why << "superadditivity off by "
                        << (base.value + other.value - sum.value);
                    return false;
                }
                ++superadd;
            }
        }
    }
    if (conj < 50 || homog < 50 || shift < 50 || superadd < 50) {
        why << "insufficient solved instances: " << conj << "/" << homog << "/" << shift
            << "/" << superadd;
        return false;
    }
    return true;
}

bool criterion_affine_invariance(std::ostringstream& why) {
    std::mt19937 rng(424242);
    int done = 0;
    for (int rep = 0; rep < 40 && done < 20; ++rep) {
        auto inst = testutil::random_instance(rng, 2);
        PrevisionResult direct = lower_prevision(inst.assess, inst.f);
        if (direct.status != PrevisionStatus::Value) continue;
        const double w = inst.b - inst.a;
        AssessmentSet mapped;
        mapped.omega = SemiAlgebraicSet::interval(0.0, 1.0);
        mapped.degree = inst.assess.degree;
        for (const auto& g : inst.assess.gambles)
            mapped.gambles.push_back(g.substitute_affine({inst.a}, {w}));
        PrevisionResult via =
            lower_prevision(mapped, inst.f.substitute_affine({inst.a}, {w}));
        if (via.status != PrevisionStatus::Value) {
            why << "mapped instance unsolved";
            return false;
        }
        if (std::fabs(via.value - direct.value) > 1e-6) {
            why << "values differ by " << std::fabs(via.value - direct.value);
            return false;
        }
        ++done;
    }
    if (done < 20) {
        why << "only " << done << "/20 instances solved";
        return false;
    }
    return true;
}

}  // namespace

int main() {
    std::vector<Criterion> criteria = {
        {"1. Markov bound min(1, m/u) at d=2, each solve < 2 s", criterion_markov},
        {"2. covariance bounds -/+ s1 s2 at d=1", criterion_covariance},
        {"3. avoiding-sure-loss dichotomy on [0,10]", criterion_asl},
        {"4. SOS classification with certificates", criterion_sos_classification},
        {"5. psd moment-matrix counterexample, L(f) = -31", criterion_moment_counterexample},
        {"6. unbounded upper prevision of x^4 under pinned moments", criterion_unbounded},
        {"7. degree monotonicity, conservativeness, gap closure (25 instances)",
         criterion_convergence},
        {"8. option case study vs grid-8001 oracle within 5e-3", criterion_case_study},
        {"9. conditioning: primal/dual agreement and oracle bound (10 instances)",
         criterion_conditioning},
        {"10. coherence properties at 1e-6 (50 instances each)", criterion_coherence},
        {"11. affine reparametrization invariance (20 instances)",
         criterion_affine_invariance},
    };
    int failures = 0;
    for (auto& c : criteria) {
        std::ostringstream why;
        const double t0 = now_s();
        bool ok = false;
        try {
            ok = c.run(why);
        } catch (const std::exception& e) {
            why << "exception: " << e.what();
        }
        const double dt = now_s() - t0;
        std::printf("[%s] %-72s (%.1f s)%s%s\n", ok ? "PASS" : "FAIL", c.name.c_str(), dt,
                    ok ? "" : " -- ", ok ? "" : why.str().c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    if (failures == 0)
        std::printf("all %zu acceptance criteria passed\n", criteria.size());
    else
        std::printf("%d acceptance criteria FAILED\n", failures);
    return failures == 0 ? 0 : 1;
}
