#pragma once

// Separable background geometries (X, gbar) and their curvature data.
//
//   TorusSlab:  gbar = dr^2 + sum_i phi_i(r)^2 dx_i^2 on T^n x [0,L],
//               boundary at r = 0 (and r = L unless truncated).
//   WarpedBall: gbar = drho^2 + phi(rho)^2 g_{S^n} on [0, rho0],
//               boundary at rho = rho0, boundary distance r = rho0 - rho.
//
// Everything the boundary calculus needs reduces to radial scalars built
// from the profiles and their derivatives. Public evaluators take the
// physical boundary distance r; a conformal rescale by a radial factor is
// carried as a state (new arclength coordinate) so rescaled geometries go
// through the same code paths.

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "syscat/chebyshev.hpp"
#include "syscat/profile.hpp"
#include "syscat/series.hpp"

namespace syscat {

enum class GeomKind { TorusSlab, WarpedBall };

/// Interior closure used when a slab profile degenerates before the far
/// boundary: the geometry is cut at r_end with an even (Neumann) cap. The
/// boundary-local quantities computed on such a geometry do not depend on
/// the cap; global ones are reported for the capped domain only.
enum class InteriorBC { SymmetricMid, NeumannCap, BallCenter };

struct BoundaryInvariantsExact {
    int n = 0;
    Rational H, LoNormSq, Lo3, R, Rbar, Rbar00, dRbar;
    std::vector<Rational> Lo, Ric, RbarRic, R0ii0;
};

struct BoundaryInvariants {
    int n = 0;
    double H = 0, LoNormSq = 0, Lo3 = 0;
    double R = 0, Rbar = 0, Rbar00 = 0, dRbar = 0, dRic00 = 0;
    std::vector<double> Lmixed, Lo, Ric, RbarRic, R0ii0, mult;

    double lo_dot_ric() const { return dot(Lo, Ric); }
    double lo_dot_rbar_ric() const { return dot(Lo, RbarRic); }
    double lo_dot_r0() const { return dot(Lo, R0ii0); }

private:
    double dot(const std::vector<double>& x, const std::vector<double>& y) const {
        double s = 0;
        for (size_t i = 0; i < x.size(); ++i) s += mult[i] * x[i] * y[i];
        return s;
    }
};

inline double sphere_volume(int n) {
    // vol(S^n), unit round
    return 2.0 * std::pow(M_PI, (n + 1) / 2.0) / std::tgamma((n + 1) / 2.0);
}

struct RescaleState {
    Profile omega;   // in the base profile coordinate (slab r, ball rho)
    ChebFun dist;    // new boundary distance as a function of the base one
    ChebFun dist_d;  // its derivative e^{omega}
    double new_end = 0, new_len = 0;
};

class ModelGeometry {
public:
    GeomKind kind = GeomKind::TorusSlab;
    int n = 0;
    bool symmetric = false;
    InteriorBC interior = InteriorBC::SymmetricMid;

    static ModelGeometry make_slab(int n, std::vector<Profile> profiles, bool symmetric,
                                   double L = 1.0, std::optional<double> r_interior = {}) {
        ModelGeometry g;
        g.kind = GeomKind::TorusSlab;
        g.n = n;
        g.symmetric = symmetric;
        g.prof_ = std::move(profiles);
        g.len_ = L;
        if (static_cast<int>(g.prof_.size()) != n)
            throw std::invalid_argument("TorusSlab needs n profiles");
        if (r_interior) {
            g.end_ = *r_interior;
            g.interior = InteriorBC::NeumannCap;
        } else if (symmetric) {
            g.end_ = L / 2;
            g.interior = InteriorBC::SymmetricMid;
        } else {
            throw std::invalid_argument(
                "asymmetric TorusSlab requires an explicit interior cutoff");
        }
        g.validate();
        return g;
    }

    static ModelGeometry make_ball(int n, Profile profile, const Rational& rho0 = Rational(1)) {
        ModelGeometry g;
        g.kind = GeomKind::WarpedBall;
        g.n = n;
        g.prof_ = {std::move(profile)};
        g.len_ = to_double(rho0);
        g.len_q_ = rho0;
        g.end_ = g.len_;
        g.interior = InteriorBC::BallCenter;
        g.validate();
        return g;
    }

    // -- structure ----------------------------------------------------------

    int dirs() const { return kind == GeomKind::WarpedBall ? 1 : n; }
    double mult(int) const { return kind == GeomKind::WarpedBall ? n : 1; }
    double domain_end() const { return resc_ ? resc_->new_end : end_; }
    double domain_len() const { return resc_ ? resc_->new_len : len_; }
    bool rescaled() const { return resc_.has_value(); }
    const Profile& profile(int i) const { return prof_[i]; }
    const std::optional<RescaleState>& rescale_state() const { return resc_; }

    int components() const {
        return (kind == GeomKind::TorusSlab && interior == InteriorBC::SymmetricMid) ? 2 : 1;
    }
    /// Boundary volume of one component (they agree on symmetric slabs).
    double vol_k() const {
        if (kind == GeomKind::WarpedBall) return std::pow(phi(0, 0.0), n) * sphere_volume(n);
        double v = 1.0;
        for (int i = 0; i < n; ++i) v *= phi(i, 0.0);
        return v;
    }
    double total_vol_k() const { return components() * vol_k(); }

    // -- base-coordinate helpers --------------------------------------------

    /// Base boundary-distance for a physical boundary-distance r.
    double base_dist(double r) const {
        if (!resc_) return r;
        return cheb_invert(resc_->dist, resc_->dist_d, r, r);
    }
    /// Base profile coordinate (slab global r / ball rho) of base distance t.
    double base_coord(double t) const { return kind == GeomKind::WarpedBall ? len_ - t : t; }

    double omega_at_dist(double t) const {
        if (!resc_) return 0.0;
        return resc_->omega(base_coord(t));
    }
    /// d omega / d(boundary distance) at base distance t.
    double omega_d_at_dist(double t, int order = 1) const {
        if (!resc_) return 0.0;
        double sgn = (kind == GeomKind::WarpedBall && (order % 2)) ? -1.0 : 1.0;
        return sgn * resc_->omega.deriv(base_coord(t), order);
    }

    // -- pointwise metric data (physical boundary distance r) ----------------

    /// Profile value in the physical coordinate.
    double phi(int i, double r) const {
        double t = base_dist(r);
        double v = prof_[i](base_coord(t));
        return resc_ ? std::exp(omega_at_dist(t)) * v : v;
    }
    /// d phi / dr (physical).
    double phi_r(int i, double r) const {
        double t = base_dist(r);
        double dphi = base_phi_d(i, t, 1);
        if (!resc_) return dphi;
        double w = omega_at_dist(t), wd = omega_d_at_dist(t);
        return wd * prof_[i](base_coord(t)) + dphi;  // e^{-w} d/dt (e^{w} phi)
    }

    /// P = sum_i m_i dlog(phi_i)/dr = (1/2) h^{mu nu} h'_{mu nu}.
    double P(double r) const {
        double t = base_dist(r);
        double acc = 0.0;
        for (int i = 0; i < dirs(); ++i)
            acc += mult(i) * base_phi_d(i, t, 1) / prof_[i](base_coord(t));
        if (!resc_) return acc;
        return std::exp(-omega_at_dist(t)) * (acc + n * omega_d_at_dist(t));
    }

    /// Ambient scalar curvature. Rescaled geometries use the conformal law
    /// Rbar~ = e^{-2w}(Rbar - 2n lap(w) - n(n-1)|dw|^2) with radial w.
    double Rbar(double r) const {
        double t = base_dist(r);
        double base = base_rbar(t);
        if (!resc_) return base;
        double w = omega_at_dist(t), w1 = omega_d_at_dist(t), w2 = omega_d_at_dist(t, 2);
        double lap = w2 + base_P(t) * w1;
        return std::exp(-2 * w) * (base - 2 * n * lap - n * (n - 1) * w1 * w1);
    }

    /// Tangential Laplacian eigenvalue of a torus Fourier mode.
    double lambda_torus(const std::vector<int>& k, double r) const {
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            double f = 2 * M_PI * k[i] / phi(i, r);
            acc += f * f;
        }
        return acc;
    }
    /// Tangential eigenvalue of a ball spherical-harmonic mode.
    double lambda_ball(int l, double r) const {
        double f = phi(0, r);
        return l * (l + n - 1.0) / (f * f);
    }

    /// Slice volume at distance r (full boundary-component slice).
    double A(double r) const {
        double v = kind == GeomKind::WarpedBall ? std::pow(phi(0, r), n) * sphere_volume(n) : 1.0;
        if (kind == GeomKind::TorusSlab)
            for (int i = 0; i < n; ++i) v *= phi(i, r);
        return v;
    }

    /// Per-direction local Taylor of the physical profile at distance r.
    SeriesD phi_jet(int i, double r, int K) const {
        if (!resc_) {
            double x = base_coord(r);
            SeriesD jet = prof_[i].taylor(x, K);
            return kind == GeomKind::WarpedBall ? flip_sign(jet, K) : jet;
        }
        return rescaled_phi_jet(i, r, K);
    }

    // -- boundary series (r = 0) ---------------------------------------------

    std::vector<SeriesD> boundary_jets(int K) const {
        std::vector<SeriesD> out;
        for (int i = 0; i < dirs(); ++i) out.push_back(phi_jet(i, 0.0, K));
        return out;
    }

    std::vector<SeriesQ> boundary_jets_exact(int K) const {
        if (resc_) throw std::invalid_argument("exact jets unavailable for rescaled geometries");
        std::vector<SeriesQ> out;
        Rational x0 = kind == GeomKind::WarpedBall ? len_q_ : Rational(0);
        for (int i = 0; i < dirs(); ++i) {
            SeriesQ jet = prof_[i].taylor_exact(x0, K);
            if (kind == GeomKind::WarpedBall) {
                SeriesQ f = SeriesQ::zero(K);
                for (const auto& [key, c] : jet.terms())
                    f.set(key.first, key.second, key.first % 2 ? -c : c);
                jet = f;
            }
            out.push_back(jet);
        }
        return out;
    }

    /// Near-center Taylor (ball): physical profile as a series in the
    /// distance-from-center coordinate.
    SeriesD center_jet(int K) const {
        if (kind != GeomKind::WarpedBall) throw std::invalid_argument("center_jet: ball only");
        SeriesD base = prof_[0].taylor(0.0, K);
        if (!resc_) return base;
        // new center distance m~ = int_0^m e^{w}; phi~ = e^{w} phi
        SeriesD wj = resc_->omega.taylor(0.0, K);
        SeriesD ew = wj.exp(K);
        SeriesD mt = ew.integral().truncated(K);  // m~(m), valuation 1
        SeriesD minv = mt.reversion(K);
        return (ew * base).truncated(K).compose(minv, K);
    }

    // -- invariants and checks ------------------------------------------------

    BoundaryInvariants boundary_invariants() const;
    BoundaryInvariantsExact boundary_invariants_exact() const;

    /// Conformal rescale by e^{2 omega} gbar (omega radial, in the base
    /// profile coordinate). Returns the re-arclength-parametrized geometry.
    ModelGeometry conformal_rescale(const Profile& omega) const;

    // -- helpers used by solvers ----------------------------------------------

    double base_P(double t) const {
        double acc = 0.0;
        for (int i = 0; i < dirs(); ++i)
            acc += mult(i) * base_phi_d(i, t, 1) / prof_[i](base_coord(t));
        return acc;
    }

    double base_rbar(double t) const {
        if (kind == GeomKind::WarpedBall && len_ - t < 0.1 * len_) {
            // near the center: evaluate precomputed regular series in m
            ensure_center_rbar();
            return center_rbar_->eval_at(len_ - t);
        }
        return base_rbar_direct(t);
    }

    /// Sectional curvatures at distance r (base geometries only):
    /// radial K_{r,i} per direction and tangential K_{ij} pair values.
    struct Sectionals {
        std::vector<double> Kr;          // per direction
        std::vector<std::vector<double>> Kt;  // dirs x dirs, i != j (slab); ball: [0][0]
        double Rbar = 0;
        std::vector<double> Ric;  // frame diagonal, [0] = rr then directions
    };
    Sectionals sectionals(double r) const;

private:
    std::vector<Profile> prof_;
    double len_ = 1.0, end_ = 0.5;
    Rational len_q_ = 1;
    std::optional<RescaleState> resc_;

    struct CenterSeries {
        SeriesD s;
        double eval_at(double m) const { return s.eval(std::max(m, 1e-300)); }
    };
    mutable std::optional<CenterSeries> center_rbar_;

    static SeriesD flip_sign(const SeriesD& jet, int K) {
        SeriesD f = SeriesD::zero(K);
        for (const auto& [key, c] : jet.terms())
            f.set(key.first, key.second, key.first % 2 ? -c : c);
        return f;
    }

    double base_phi_d(int i, double t, int order) const {
        double x = base_coord(t);
        double v = prof_[i].deriv(x, order);
        return (kind == GeomKind::WarpedBall && (order % 2)) ? -v : v;
    }

    double base_rbar_direct(double t) const {
        if (kind == GeomKind::WarpedBall) {
            double f = prof_[0](base_coord(t));
            double f1 = base_phi_d(0, t, 1), f2 = base_phi_d(0, t, 2);
            return -2.0 * n * f2 / f + n * (n - 1.0) * (1.0 - f1 * f1) / (f * f);
        }
        double acc = 0.0;
        std::vector<double> lp(n), v(n);
        for (int i = 0; i < n; ++i) {
            v[i] = prof_[i](t);
            lp[i] = prof_[i].deriv(t, 1);
            acc += -2.0 * prof_[i].deriv(t, 2) / v[i];
        }
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) acc += -2.0 * lp[i] * lp[j] / (v[i] * v[j]);
        return acc;
    }

    void ensure_center_rbar() const {
        if (center_rbar_) return;
        const int K = 10;
        SeriesD f = prof_[0].taylor(0.0, K);  // phi(m), m from center
        SeriesD f1 = f.derivative().truncated(K - 1);
        SeriesD f2 = f1.derivative().truncated(K - 2);
        SeriesD one = SeriesD::one(K - 2);
        SeriesD rb = (-2.0 * n) * (f2 * f.inverse(K - 2)).truncated(K - 2);
        SeriesD tang = (one - (f1 * f1).truncated(K - 2)) * (f * f).inverse(K - 2);
        rb = rb + (n * (n - 1.0)) * tang.truncated(K - 2);
        center_rbar_ = CenterSeries{rb};
    }

    SeriesD rescaled_phi_jet(int i, double r, int K) const;

    void validate() const {
        int samples = 200;
        for (int i = 0; i < dirs(); ++i) {
            for (int k = (kind == GeomKind::WarpedBall ? 1 : 0); k <= samples; ++k) {
                double x = len_ * k / samples;
                if (kind == GeomKind::TorusSlab && interior == InteriorBC::NeumannCap &&
                    x > end_ + 1e-9)
                    continue;
                if (prof_[i](x) <= 0) throw std::invalid_argument("degenerate metric");
            }
        }
        if (kind == GeomKind::WarpedBall) {
            const Profile& p = prof_[0];
            if (std::abs(p(0.0)) > 1e-14 || std::abs(p.deriv(0.0, 1) - 1.0) > 1e-12 ||
                std::abs(p.deriv(0.0, 2)) > 1e-12)
                throw std::invalid_argument("singular center");
        }
        if (kind == GeomKind::TorusSlab && symmetric) {
            for (int i = 0; i < n; ++i)
                for (int k = 0; k <= 20; ++k) {
                    double x = len_ * k / 20.0;
                    if (std::abs(prof_[i](x) - prof_[i](len_ - x)) > 1e-14)
                        throw std::invalid_argument("profile asymmetry exceeds tolerance");
                }
        }
    }

    friend ModelGeometry rescaled_copy(const ModelGeometry&, const Profile&);
};

// ---------------------------------------------------------------------------

inline BoundaryInvariants ModelGeometry::boundary_invariants() const {
    const int K = 4;
    std::vector<SeriesD> jets = boundary_jets(K);
    BoundaryInvariants inv;
    inv.n = n;
    int d = dirs();
    std::vector<double> w(d), a(d), b2(d);
    for (int i = 0; i < d; ++i) {
        w[i] = jets[i].coeff(0, 0);
        a[i] = jets[i].coeff(1, 0);
        b2[i] = jets[i].coeff(2, 0);  // phi''/2
        inv.mult.push_back(mult(i));
    }
    inv.Lmixed.resize(d);
    for (int i = 0; i < d; ++i) inv.Lmixed[i] = -a[i] / w[i];
    inv.H = 0;
    for (int i = 0; i < d; ++i) inv.H += inv.mult[i] * inv.Lmixed[i];
    inv.Lo.resize(d);
    for (int i = 0; i < d; ++i) inv.Lo[i] = inv.Lmixed[i] - inv.H / n;
    for (int i = 0; i < d; ++i) {
        inv.LoNormSq += inv.mult[i] * inv.Lo[i] * inv.Lo[i];
        inv.Lo3 += inv.mult[i] * inv.Lo[i] * inv.Lo[i] * inv.Lo[i];
    }
    // intrinsic slice curvature
    inv.Ric.assign(d, 0.0);
    if (kind == GeomKind::WarpedBall) {
        inv.R = n * (n - 1.0) / (w[0] * w[0]);
        inv.Ric[0] = (n - 1.0) / (w[0] * w[0]);
    }
    // ambient curvature from jets
    std::vector<double> Kr(d);
    for (int i = 0; i < d; ++i) Kr[i] = -2.0 * b2[i] / w[i];
    inv.R0ii0 = Kr;
    auto Kt = [&](int i, int j) {
        if (kind == GeomKind::WarpedBall) return (1.0 - a[0] * a[0]) / (w[0] * w[0]);
        return -a[i] * a[j] / (w[i] * w[j]);
    };
    inv.Rbar00 = 0;
    for (int i = 0; i < d; ++i) inv.Rbar00 += inv.mult[i] * Kr[i];
    inv.RbarRic.resize(d);
    if (kind == GeomKind::WarpedBall) {
        inv.RbarRic[0] = Kr[0] + (n - 1.0) * Kt(0, 0);
        inv.Rbar = 2.0 * n * Kr[0] + n * (n - 1.0) * Kt(0, 0);
    } else {
        for (int i = 0; i < d; ++i) {
            inv.RbarRic[i] = Kr[i];
            for (int j = 0; j < d; ++j)
                if (j != i) inv.RbarRic[i] += Kt(i, j);
        }
        inv.Rbar = inv.Rbar00;
        for (int i = 0; i < d; ++i) inv.Rbar += inv.RbarRic[i];
    }
    // first radial derivatives of Rbar and of Ric_rr, via series
    {
        const int KS = 3;
        std::vector<SeriesD> js = boundary_jets(KS + 2);
        SeriesD rbar = SeriesD::zero(KS);
        SeriesD ric00 = SeriesD::zero(KS);
        if (kind == GeomKind::WarpedBall) {
            SeriesD f = js[0], f1 = f.derivative().truncated(KS + 1),
                    f2 = f1.derivative().truncated(KS);
            SeriesD invf = f.inverse(KS);
            rbar = (-2.0 * n) * (f2 * invf).truncated(KS) +
                   (n * (n - 1.0)) *
                       ((SeriesD::one(KS) - (f1 * f1).truncated(KS)) * (invf * invf)).truncated(KS);
            ric00 = (-1.0 * n) * (f2 * invf).truncated(KS);
        } else {
            for (int i = 0; i < d; ++i) {
                SeriesD f = js[i], f1 = f.derivative().truncated(KS + 1),
                        f2 = f1.derivative().truncated(KS);
                SeriesD invf = f.inverse(KS);
                rbar = rbar + (-2.0) * (f2 * invf).truncated(KS);
                ric00 = ric00 + (-1.0) * (f2 * invf).truncated(KS);
            }
            for (int i = 0; i < d; ++i)
                for (int j = i + 1; j < d; ++j) {
                    SeriesD t = (js[i].derivative().truncated(KS) *
                                 js[j].derivative().truncated(KS))
                                    .truncated(KS) *
                                (js[i].inverse(KS) * js[j].inverse(KS)).truncated(KS);
                    rbar = rbar + (-2.0) * t.truncated(KS);
                }
        }
        inv.dRbar = rbar.coeff(1, 0);
        inv.dRic00 = ric00.coeff(1, 0);
    }
    return inv;
}

inline BoundaryInvariantsExact ModelGeometry::boundary_invariants_exact() const {
    const int K = 3;
    std::vector<SeriesQ> jets = boundary_jets_exact(K + 2);
    BoundaryInvariantsExact inv;
    inv.n = n;
    int d = dirs();
    std::vector<Rational> w(d), a(d), b2(d);
    for (int i = 0; i < d; ++i) {
        w[i] = jets[i].coeff(0, 0);
        a[i] = jets[i].coeff(1, 0);
        b2[i] = jets[i].coeff(2, 0);
    }
    std::vector<Rational> m(d);
    for (int i = 0; i < d; ++i) m[i] = kind == GeomKind::WarpedBall ? Rational(n) : Rational(1);
    inv.H = 0;
    std::vector<Rational> Lm(d);
    for (int i = 0; i < d; ++i) {
        Lm[i] = -a[i] / w[i];
        inv.H += m[i] * Lm[i];
    }
    inv.Lo.resize(d);
    inv.LoNormSq = 0;
    inv.Lo3 = 0;
    for (int i = 0; i < d; ++i) {
        inv.Lo[i] = Lm[i] - inv.H / n;
        inv.LoNormSq += m[i] * inv.Lo[i] * inv.Lo[i];
        inv.Lo3 += m[i] * inv.Lo[i] * inv.Lo[i] * inv.Lo[i];
    }
    inv.R = 0;
    inv.Ric.assign(d, Rational(0));
    if (kind == GeomKind::WarpedBall) {
        inv.R = Rational(n * (n - 1)) / (w[0] * w[0]);
        inv.Ric[0] = Rational(n - 1) / (w[0] * w[0]);
    }
    std::vector<Rational> Kr(d);
    for (int i = 0; i < d; ++i) Kr[i] = Rational(-2) * b2[i] / w[i];
    inv.R0ii0 = Kr;
    auto Kt = [&](int i, int j) -> Rational {
        if (kind == GeomKind::WarpedBall) return (Rational(1) - a[0] * a[0]) / (w[0] * w[0]);
        return -a[i] * a[j] / (w[i] * w[j]);
    };
    inv.Rbar00 = 0;
    for (int i = 0; i < d; ++i) inv.Rbar00 += m[i] * Kr[i];
    inv.RbarRic.assign(d, Rational(0));
    if (kind == GeomKind::WarpedBall) {
        inv.RbarRic[0] = Kr[0] + Rational(n - 1) * Kt(0, 0);
        inv.Rbar = Rational(2 * n) * Kr[0] + Rational(n * (n - 1)) * Kt(0, 0);
    } else {
        for (int i = 0; i < d; ++i) {
            inv.RbarRic[i] = Kr[i];
            for (int j = 0; j < d; ++j)
                if (j != i) inv.RbarRic[i] += Kt(i, j);
        }
        inv.Rbar = inv.Rbar00;
        for (int i = 0; i < d; ++i) inv.Rbar += inv.RbarRic[i];
    }
    // dRbar via exact series
    SeriesQ rbar = SeriesQ::zero(2);
    if (kind == GeomKind::WarpedBall) {
        SeriesQ f = jets[0], f1 = f.derivative().truncated(3), f2 = f1.derivative().truncated(2);
        SeriesQ invf = f.inverse(2);
        rbar = Rational(-2 * n) * (f2 * invf).truncated(2) +
               Rational(n * (n - 1)) *
                   ((SeriesQ::one(2) - (f1 * f1).truncated(2)) * (invf * invf)).truncated(2);
    } else {
        for (int i = 0; i < d; ++i) {
            SeriesQ f = jets[i], f1 = f.derivative().truncated(3),
                    f2 = f1.derivative().truncated(2);
            rbar = rbar + Rational(-2) * (f2 * f.inverse(2)).truncated(2);
        }
        for (int i = 0; i < d; ++i)
            for (int j = i + 1; j < d; ++j) {
                SeriesQ t = (jets[i].derivative().truncated(2) * jets[j].derivative().truncated(2))
                                .truncated(2) *
                            (jets[i].inverse(2) * jets[j].inverse(2)).truncated(2);
                rbar = rbar + Rational(-2) * t.truncated(2);
            }
    }
    inv.dRbar = rbar.coeff(1, 0);
    return inv;
}

inline ModelGeometry::Sectionals ModelGeometry::sectionals(double r) const {
    if (resc_) throw std::invalid_argument("sectionals: base geometries only");
    Sectionals s;
    int d = dirs();
    double t = r;
    std::vector<double> v(d), v1(d), v2(d);
    for (int i = 0; i < d; ++i) {
        v[i] = prof_[i](base_coord(t));
        v1[i] = base_phi_d(i, t, 1);
        v2[i] = base_phi_d(i, t, 2);
    }
    s.Kr.resize(d);
    for (int i = 0; i < d; ++i) s.Kr[i] = -v2[i] / v[i];
    s.Kt.assign(d, std::vector<double>(d, 0.0));
    if (kind == GeomKind::WarpedBall) {
        s.Kt[0][0] = (1.0 - v1[0] * v1[0]) / (v[0] * v[0]);
    } else {
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                if (i != j) s.Kt[i][j] = -v1[i] * v1[j] / (v[i] * v[j]);
    }
    // frame Ricci diag: rr then directions; Rbar as double sum
    s.Ric.assign(d + 1, 0.0);
    for (int i = 0; i < d; ++i) s.Ric[0] += mult(i) * s.Kr[i];
    if (kind == GeomKind::WarpedBall) {
        s.Ric[1] = s.Kr[0] + (n - 1.0) * s.Kt[0][0];
        s.Rbar = 2.0 * n * s.Kr[0] + n * (n - 1.0) * s.Kt[0][0];
    } else {
        for (int i = 0; i < d; ++i) {
            s.Ric[i + 1] = s.Kr[i];
            for (int j = 0; j < d; ++j)
                if (j != i) s.Ric[i + 1] += s.Kt[i][j];
            s.Rbar += s.Ric[i + 1];
        }
        s.Rbar += s.Ric[0];
    }
    return s;
}

inline SeriesD ModelGeometry::rescaled_phi_jet(int i, double r, int K) const {
    // phi~(r~) around r: local Taylor of e^{w} phi in the base distance t,
    // composed with the inverse of the local arclength map.
    double t0 = base_dist(r);
    SeriesD phis = prof_[i].taylor(base_coord(t0), K);
    if (kind == GeomKind::WarpedBall) phis = flip_sign(phis, K);
    SeriesD wj = SeriesD::zero(K);
    {
        double x0 = base_coord(t0);
        SeriesD wbase = resc_->omega.taylor(x0, K);
        if (kind == GeomKind::WarpedBall) wbase = flip_sign(wbase, K);
        wj = wbase;
    }
    double w0 = wj.coeff(0, 0);
    SeriesD wshift = wj;
    wshift.set(0, 0, 0.0);
    SeriesD ew = wshift.exp(K);  // e^{w - w0}
    // dt~/dt = e^{w}: local arclength increment, normalized to start at 0
    SeriesD dmap = (std::exp(w0) * ew).integral().truncated(K);
    SeriesD tinv = dmap.reversion(K);
    SeriesD full = (std::exp(w0) * (ew * phis).truncated(K));
    return full.compose(tinv, K);
}

inline ModelGeometry rescaled_copy(const ModelGeometry& g, const Profile& omega) {
    ModelGeometry out = g;
    const int N = 128;
    std::vector<double> ts = ChebFun::nodes(N, 0.0, g.len_);
    std::vector<double> vals(ts.size());
    // cumulative arclength int_0^t e^{w_dist}: integrate the ODE d/dt = e^w
    // on the Chebyshev grid with high-order quadrature per interval
    auto wdist = [&](double t) {
        double x = g.kind == GeomKind::WarpedBall ? g.len_ - t : t;
        return omega(x);
    };
    double acc = 0.0;
    vals[0] = 0.0;
    for (size_t k = 1; k < ts.size(); ++k) {
        // 5-point Gauss-Legendre on [ts[k-1], ts[k]]
        static const double gx[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                     0.5384693101056831, 0.9061798459386640};
        static const double gw[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                     0.4786286704993665, 0.2369268850561891};
        double a = ts[k - 1], b = ts[k], mid = 0.5 * (a + b), half = 0.5 * (b - a);
        double sum = 0.0;
        for (int q = 0; q < 5; ++q) sum += gw[q] * std::exp(wdist(mid + half * gx[q]));
        acc += half * sum;
        vals[k] = acc;
    }
    RescaleState rs;
    rs.omega = omega;
    rs.dist = ChebFun::from_values(vals, 0.0, g.len_);
    std::vector<double> dvals(ts.size());
    for (size_t k = 0; k < ts.size(); ++k) dvals[k] = std::exp(wdist(ts[k]));
    rs.dist_d = ChebFun::from_values(dvals, 0.0, g.len_);
    rs.new_len = vals.back();
    rs.new_end = g.kind == GeomKind::WarpedBall
                     ? rs.new_len
                     : (g.interior == InteriorBC::SymmetricMid ? rs.new_len / 2
                                                               : rs.dist(g.end_));
    out.resc_ = rs;
    out.center_rbar_.reset();
    return out;
}

inline ModelGeometry ModelGeometry::conformal_rescale(const Profile& omega) const {
    if (resc_) {
        // compose conformal factors on the base geometry: e^{2w2}(e^{2w1} g)
        // = e^{2(w1+w2)} g, both factors functions of the base coordinate
        if (omega.basis() != resc_->omega.basis())
            throw std::invalid_argument("composed conformal factors must share a basis");
        std::vector<Rational> sum = resc_->omega.coeffs();
        const auto& add = omega.coeffs();
        if (add.size() > sum.size()) sum.resize(add.size(), Rational(0));
        for (size_t i = 0; i < add.size(); ++i) sum[i] += add[i];
        ModelGeometry base = *this;
        base.resc_.reset();
        return base.conformal_rescale(Profile(omega.basis(), sum));
    }
    if (kind == GeomKind::WarpedBall && std::abs(omega.deriv(0.0, 1)) > 1e-13)
        throw std::invalid_argument("radial conformal factor must be even at the ball center");
    if (kind == GeomKind::TorusSlab && symmetric) {
        for (int k = 0; k <= 16; ++k) {
            double x = len_ * k / 16.0;
            if (std::abs(omega(x) - omega(len_ - x)) > 1e-13)
                throw std::invalid_argument("conformal factor must respect slab symmetry");
        }
    }
    return rescaled_copy(*this, omega);
}

// -- identity checks ---------------------------------------------------------

/// Gauss-type contraction: Lo.R0 = Lo.RbarRic - Lo.Ric + ((n-2)/n) H |Lo|^2 - Lo^3.
inline double lr_contraction_residual(const BoundaryInvariants& v) {
    double rhs = v.lo_dot_rbar_ric() - v.lo_dot_ric() +
                 (v.n - 2.0) / v.n * v.H * v.LoNormSq - v.Lo3;
    return std::abs(v.lo_dot_r0() - rhs);
}

/// Codazzi-type scalar identity (tangential-gradient terms vanish on these
/// models): dRic00 = dRbar/2 - Lo.RbarRic + ((n-1)/(2n)) H Rbar
///          - ((n+1)/(2n)) H R - ((n+1)/(2n)) H |Lo|^2 + ((n^2-1)/(2n^2)) H^3.
inline double codazzi_residual(const BoundaryInvariants& v) {
    double n = v.n;
    double rhs = 0.5 * v.dRbar - v.lo_dot_rbar_ric() + (n - 1) / (2 * n) * v.H * v.Rbar -
                 (n + 1) / (2 * n) * v.H * v.R - (n + 1) / (2 * n) * v.H * v.LoNormSq +
                 (n * n - 1) / (2 * n * n) * v.H * v.H * v.H;
    return std::abs(v.dRic00 - rhs);
}

// -- radial series for the formal machinery -----------------------------------

/// Boundary series of the radial scalars every formal computation consumes:
/// T = h^{mu nu} h'_{mu nu} = 2P, the ambient scalar curvature, and the
/// slice-volume ratio A(r)/A(0), all to order K in the boundary distance.
template <class C>
struct RadialSeriesData {
    int n = 0;
    bool ball = false;
    PolyLogSeries<C> T, Rbar, Aratio;
    std::vector<PolyLogSeries<C>> phi;  // per-direction physical profiles
};

template <class C>
RadialSeriesData<C> radial_series_from_jets(int n, bool ball,
                                            const std::vector<PolyLogSeries<C>>& jets, int K) {
    using S = PolyLogSeries<C>;
    RadialSeriesData<C> out;
    out.n = n;
    out.ball = ball;
    out.phi = jets;
    int d = static_cast<int>(jets.size());
    auto m = [&](int) { return ball ? n : 1; };
    S T = S::zero(K), rbar = S::zero(K), logA = S::zero(K + 1);
    for (int i = 0; i < d; ++i) {
        S f = jets[i].truncated(K + 2);
        S f1 = f.derivative().truncated(K + 1);
        S f2 = f1.derivative().truncated(K);
        S invf = f.inverse(K + 1);
        T = T + ring_ops<C>::from_long(2 * m(i)) * (f1 * invf).truncated(K);
        rbar = rbar + ring_ops<C>::from_long(-2 * m(i)) * (f2 * invf).truncated(K);
        // log(phi/w) for the volume ratio
        C w = f.coeff(0, 0);
        S fn = ring_ops<C>::div(ring_ops<C>::from_long(1), w) * f.truncated(K + 1);
        fn.set(0, 0, ring_ops<C>::from_long(1));  // exact unit leading term
        logA = logA + ring_ops<C>::from_long(m(i)) * fn.log(K + 1);
    }
    if (ball) {
        S f = jets[0].truncated(K + 2);
        S f1 = f.derivative().truncated(K + 1);
        S invf = f.inverse(K + 1);
        S tang = (S::one(K) - (f1 * f1).truncated(K)) * (invf * invf).truncated(K);
        rbar = rbar + ring_ops<C>::from_long(n * (n - 1)) * tang.truncated(K);
    } else {
        for (int i = 0; i < d; ++i)
            for (int j = i + 1; j < d; ++j) {
                S t = (jets[i].derivative().truncated(K) * jets[j].derivative().truncated(K))
                          .truncated(K) *
                      (jets[i].inverse(K) * jets[j].inverse(K)).truncated(K);
                rbar = rbar + ring_ops<C>::from_long(-2) * t.truncated(K);
            }
    }
    out.T = T;
    out.Rbar = rbar;
    out.Aratio = logA.truncated(K).exp(K);
    return out;
}

inline RadialSeriesData<double> radial_series(const ModelGeometry& g, int K) {
    return radial_series_from_jets<double>(g.n, g.kind == GeomKind::WarpedBall,
                                           g.boundary_jets(K + 2), K);
}

inline RadialSeriesData<Rational> radial_series_exact(const ModelGeometry& g, int K) {
    return radial_series_from_jets<Rational>(g.n, g.kind == GeomKind::WarpedBall,
                                             g.boundary_jets_exact(K + 2), K);
}

/// Boundary series of the tangential eigenvalue lambda(r) of one mode.
inline SeriesD lambda_series(const ModelGeometry& g, const std::vector<int>& torus_k, int ball_l,
                             int K) {
    SeriesD lam = SeriesD::zero(K);
    auto jets = g.boundary_jets(K + 1);
    if (g.kind == GeomKind::WarpedBall) {
        SeriesD invf = jets[0].inverse(K);
        return (ball_l * (ball_l + g.n - 1.0)) * (invf * invf).truncated(K);
    }
    for (int i = 0; i < g.n; ++i) {
        double f = 2 * M_PI * torus_k[i];
        SeriesD invf = jets[i].inverse(K);
        lam = lam + (f * f) * (invf * invf).truncated(K);
    }
    return lam;
}

/// Per-order residuals of the boundary Taylor expansion of h against the
/// curvature expressions (orders 1..3).
struct FermiReport {
    std::array<double, 4> max_residual{0, 0, 0, 0};
};

inline FermiReport fermi_check(const ModelGeometry& g, int order = 3) {
    FermiReport rep;
    const int K = 4;
    std::vector<SeriesD> jets = g.boundary_jets(K);
    for (int i = 0; i < g.dirs(); ++i) {
        double w = jets[i].coeff(0, 0), a = jets[i].coeff(1, 0);
        double b2 = jets[i].coeff(2, 0), c3 = jets[i].coeff(3, 0);
        double p1 = a, p2 = 2 * b2, p3 = 6 * c3;  // phi', phi'', phi''' at 0
        // coordinate h = phi^2; Taylor coefficients of h:
        double h1 = 2 * w * p1;
        double h2 = p1 * p1 + w * p2;            // h''/2
        double h3 = (3 * p1 * p2 + w * p3) / 3;  // h'''/6
        double L = -w * p1;                      // L_{ii} coordinate
        double Lsq = p1 * p1;                    // L_i^s L_{si} coordinate
        double R0 = -p2 * w;                     // Rbar_{0ii0} coordinate
        double dR0 = -p3 * w + p1 * p2;          // covariant radial derivative
        double LR = (-p1 / w) * R0;              // L^s_( R )00s contraction
        if (order >= 1) rep.max_residual[1] = std::max(rep.max_residual[1], std::abs(h1 + 2 * L));
        if (order >= 2)
            rep.max_residual[2] = std::max(rep.max_residual[2], std::abs(h2 - (Lsq - R0)));
        if (order >= 3)
            rep.max_residual[3] =
                std::max(rep.max_residual[3], std::abs(h3 + (dR0 - 4 * LR) / 3));
    }
    return rep;
}

}  // namespace syscat
