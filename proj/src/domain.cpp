#include "isp/domain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "isp/errors.hpp"
#include "isp/quadrature.hpp"

namespace isp {

Dispersion::Dispersion(std::vector<double> xi) : xi_(std::move(xi)) {
    if (xi_.size() < 2 || xi_.size() % 2 != 0)
        throw ValidationError("dispersion needs an even number (>= 2) of speeds");
    for (double v : xi_)
        if (!std::isfinite(v)) throw ValidationError("dispersion speeds must be finite");
    for (std::size_t i = 1; i < xi_.size(); ++i)
        if (!(xi_[i] > xi_[i - 1])) throw ValidationError("dispersion speeds must be strictly increasing");
    const std::size_t n = xi_.size() / 2;
    if (!(xi_[n - 1] < 0.0) || !(xi_[n] > 0.0))
        throw ValidationError("first n speeds must be negative and last n positive");
}

ThetaFamilies theta_families(const Dispersion& disp) {
    const int n = disp.n();
    auto x = [&](int one_based) { return disp[one_based - 1]; };
    auto fold = [](std::optional<double>& acc, double v) { acc = acc ? std::min(*acc, v) : v; };
    ThetaFamilies f;
    for (int k = 1; k <= n; ++k) {
        for (int j = 1; j <= n; ++j) {
            if (k > j) fold(f.theta1, x(j) / (x(j) - x(k)));
            if (k + j > n) fold(f.theta2, x(n + j) / (x(n + j) - x(k)));
            if (k + j < n + 2) fold(f.theta3, x(j) / (x(j) - x(n + k)));
            if (k < j) fold(f.theta4, x(n + j) / (x(n + j) - x(n + k)));
        }
    }
    return f;
}

double theta_exponent(const Dispersion& disp) {
    const auto f = theta_families(disp);
    double theta = std::numeric_limits<double>::infinity();
    for (const auto& v : {f.theta1, f.theta2, f.theta3, f.theta4})
        if (v) theta = std::min(theta, *v);
    return theta;
}

// ---------------------------------------------------------------------------

ScalarProfile ScalarProfile::exp_sum(std::vector<ExpTerm> terms) {
    for (const auto& t : terms)
        if (!(t.rate > 0.0) || !std::isfinite(t.rate))
            throw ValidationError("exponential-sum decay rates must be positive");
    ScalarProfile p;
    std::erase_if(terms, [](const ExpTerm& t) { return t.gamma == cplx(0.0); });
    p.terms_ = std::move(terms);
    return p;
}

ScalarProfile ScalarProfile::sampled(double dx, std::vector<cplx> values, double tail_rate) {
    if (!(dx > 0.0)) throw ValidationError("sampled profile needs a positive step");
    if (values.empty()) throw ValidationError("sampled profile needs at least one sample");
    if (!(tail_rate > 0.0)) throw ValidationError("sampled profile needs a positive tail rate");
    ScalarProfile p;
    p.sampled_ = SampledData{dx, std::move(values), tail_rate};
    return p;
}

ScalarProfile ScalarProfile::combine(const std::vector<std::pair<cplx, ScalarProfile>>& terms, double dx,
                                     double length) {
    const bool all_exp = std::all_of(terms.begin(), terms.end(), [](const auto& t) { return t.second.is_exp_sum(); });
    if (all_exp) {
        std::vector<ExpTerm> out;
        for (const auto& [c, p] : terms)
            for (const auto& t : p.terms()) out.push_back({c * t.gamma, t.rate});
        return exp_sum(std::move(out));
    }
    double rate = std::numeric_limits<double>::infinity();
    for (const auto& [c, p] : terms)
        if (c != cplx(0.0) && !p.is_zero()) rate = std::min(rate, p.decay_rate());
    if (!std::isfinite(rate)) return ScalarProfile{};
    const std::size_t count = static_cast<std::size_t>(std::ceil(length / dx)) + 1;
    std::vector<cplx> v(count, 0.0);
    for (std::size_t m = 0; m < count; ++m) {
        const double x = double(m) * dx;
        for (const auto& [c, p] : terms) v[m] += c * p(x);
    }
    return sampled(dx, std::move(v), rate);
}

bool ScalarProfile::is_zero() const noexcept {
    if (!sampled_) return terms_.empty();
    return std::all_of(sampled_->values.begin(), sampled_->values.end(), [](cplx v) { return v == cplx(0.0); });
}

cplx ScalarProfile::operator()(double x) const {
    if (!sampled_) {
        cplx acc = 0.0;
        for (const auto& t : terms_) acc += t.gamma * std::exp(-t.rate * x);
        return acc;
    }
    const auto& s = *sampled_;
    const double u = x / s.dx;
    const std::size_t last = s.values.size() - 1;
    if (u >= double(last)) return s.values[last] * std::exp(-s.tail_rate * (x - double(last) * s.dx));
    if (u <= 0.0) return s.values[0];
    const std::size_t i = static_cast<std::size_t>(u);
    const double t = u - double(i);
    return (1.0 - t) * s.values[i] + t * s.values[i + 1];
}

cplx ScalarProfile::tail_transform(double x, cplx omega) const {
    if (!sampled_) {
        cplx acc = 0.0;
        for (const auto& t : terms_) {
            const cplx k = -t.rate + kI * omega;
            acc += t.gamma * std::exp(k * x) / (-k);
        }
        return acc;
    }
    const auto& s = *sampled_;
    const std::size_t last = s.values.size() - 1;
    const double x_end = double(last) * s.dx;
    const cplx k_tail = -s.tail_rate + kI * omega;
    if (x < 0.0) throw InvalidArgument("sampled profile is defined on x >= 0 only");
    if (x >= x_end) return (*this)(x) * std::exp(kI * omega * x) / (-k_tail);

    cplx acc = s.values[last] * std::exp(kI * omega * x_end) / (-k_tail);
    const double u = x / s.dx;
    const std::size_t m = std::min<std::size_t>(static_cast<std::size_t>(u), last - 1);
    const double xm = double(m) * s.dx;
    // partial step [x, x_{m+1}] on the chord
    const auto whole = exp_partial_weights(omega, s.dx, s.dx);
    const auto head = exp_partial_weights(omega, s.dx, x - xm);
    const cplx ph = std::exp(kI * omega * xm);
    acc += ph * ((whole[0] - head[0]) * s.values[m] + (whole[1] - head[1]) * s.values[m + 1]);
    if (m + 1 < last) {
        std::span<const cplx> rest(s.values.data() + m + 1, last - m);
        acc += full_integral(rest, double(m + 1) * s.dx, s.dx, omega);
    }
    return acc;
}

ScalarProfile ScalarProfile::scaled(cplx factor) const {
    ScalarProfile p = *this;
    if (!sampled_) {
        for (auto& t : p.terms_) t.gamma *= factor;
        std::erase_if(p.terms_, [](const ExpTerm& t) { return t.gamma == cplx(0.0); });
    } else {
        for (auto& v : p.sampled_->values) v *= factor;
    }
    return p;
}

ScalarProfile ScalarProfile::stretched(double stretch) const {
    if (!(stretch > 0.0)) throw InvalidArgument("stretch factor must be positive");
    ScalarProfile p = *this;
    if (!sampled_) {
        for (auto& t : p.terms_) t.rate /= stretch;
    } else {
        p.sampled_->dx *= stretch;
        p.sampled_->tail_rate /= stretch;
    }
    return p;
}

double ScalarProfile::decay_rate() const {
    if (sampled_) return sampled_->tail_rate;
    double r = std::numeric_limits<double>::infinity();
    for (const auto& t : terms_) r = std::min(r, t.rate);
    return r;
}

double ScalarProfile::amplitude_bound(double rate) const {
    if (is_zero()) return 0.0;
    if (rate > decay_rate() * (1.0 + 1e-14)) return std::numeric_limits<double>::infinity();
    if (!sampled_) {
        double acc = 0.0;
        for (const auto& t : terms_) acc += std::abs(t.gamma);
        return acc;
    }
    double m = 0.0;
    for (std::size_t i = 0; i < sampled_->values.size(); ++i)
        m = std::max(m, std::abs(sampled_->values[i]) * std::exp(rate * double(i) * sampled_->dx));
    return m;
}

// ---------------------------------------------------------------------------

std::string potential_block_name(Block b) {
    switch (b) {
        case Block::B11: return "q11";
        case Block::B12: return "q12";
        case Block::B21: return "q21";
        case Block::B22: return "q22";
    }
    return "?";
}

std::string kernel_block_name(Block b) {
    switch (b) {
        case Block::B11: return "A11";
        case Block::B12: return "A12";
        case Block::B21: return "A21";
        case Block::B22: return "A22";
    }
    return "?";
}

std::optional<Block> parse_block(const std::string& name) {
    std::string s = name;
    if (!s.empty() && (s[0] == 'q' || s[0] == 'A' || s[0] == 'Q' || s[0] == 'a')) s = s.substr(1);
    if (s == "11") return Block::B11;
    if (s == "12") return Block::B12;
    if (s == "21") return Block::B21;
    if (s == "22") return Block::B22;
    return std::nullopt;
}

bool potential_entry_allowed(Block b, int n, int k, int j) {
    const int k1 = k + 1, j1 = j + 1;
    switch (b) {
        case Block::B11: return j1 < k1;
        case Block::B12: return j1 + k1 >= n + 1;
        case Block::B21: return j1 + k1 <= n + 1;
        case Block::B22: return j1 > k1;
    }
    return false;
}

bool kernel_entry_allowed(Block b, int n, int k, int j) {
    switch (b) {
        case Block::B11: return j <= k;
        case Block::B22: return j >= k;
        default: return potential_entry_allowed(b, n, k, j);
    }
}

double truncation_length(const Envelope& env, double tail_tol) {
    if (!(env.C > tail_tol)) return 0.0;
    return std::log(env.C / tail_tol) / env.eps;
}

// ---------------------------------------------------------------------------

MCanonicalPotential::MCanonicalPotential(int n) : n_(n), entries_(static_cast<std::size_t>(4 * n * n)) {
    if (n < 1) throw ValidationError("potential order n must be >= 1");
}

const ScalarProfile& MCanonicalPotential::entry(Block b, int k, int j) const {
    if (k < 0 || j < 0 || k >= n_ || j >= n_) throw InvalidArgument("potential entry index out of range");
    return entries_[static_cast<std::size_t>(static_cast<int>(b) * n_ * n_ + k * n_ + j)];
}

void MCanonicalPotential::set_entry(Block b, int k, int j, ScalarProfile p) {
    if (k < 0 || j < 0 || k >= n_ || j >= n_) throw InvalidArgument("potential entry index out of range");
    entries_[static_cast<std::size_t>(static_cast<int>(b) * n_ * n_ + k * n_ + j)] = std::move(p);
}

const ScalarProfile& MCanonicalPotential::full_entry(int r, int c) const {
    const bool lower = r >= n_, right = c >= n_;
    const Block b = lower ? (right ? Block::B22 : Block::B21) : (right ? Block::B12 : Block::B11);
    return entry(b, r - (lower ? n_ : 0), c - (right ? n_ : 0));
}

Mat MCanonicalPotential::matrix(double x) const {
    Mat q = Mat::Zero(2 * n_, 2 * n_);
    for (int r = 0; r < 2 * n_; ++r)
        for (int c = 0; c < 2 * n_; ++c) {
            const auto& p = full_entry(r, c);
            if (!p.is_zero()) q(r, c) = p(x);
        }
    return q;
}

bool MCanonicalPotential::is_zero() const {
    return std::all_of(entries_.begin(), entries_.end(), [](const ScalarProfile& p) { return p.is_zero(); });
}

Envelope MCanonicalPotential::envelope() const { return envelope_ ? *envelope_ : fitted_envelope(); }

Envelope MCanonicalPotential::fitted_envelope() const {
    double eps = std::numeric_limits<double>::infinity();
    for (const auto& p : entries_)
        if (!p.is_zero()) eps = std::min(eps, p.decay_rate());
    if (!std::isfinite(eps)) return Envelope{0.0, 1.0};
    double c = 0.0;
    for (const auto& p : entries_) c += p.amplitude_bound(eps);
    return Envelope{c, eps};
}

std::vector<Violation> validate_potential(const MCanonicalPotential& pot, const ValidationOptions& opts) {
    std::vector<Violation> out;
    const int n = pot.n();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (Block b : kAllBlocks)
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j) {
                if (potential_entry_allowed(b, n, k, j) || pot.entry(b, k, j).is_zero()) continue;
                std::ostringstream msg;
                msg << potential_block_name(b) << "(" << k + 1 << "," << j + 1 << ") must vanish: ";
                switch (b) {
                    case Block::B11: msg << "strictly lower triangular requires j < k"; break;
                    case Block::B12: msg << "lower anti-triangular requires j + k >= n + 1"; break;
                    case Block::B21: msg << "upper anti-triangular requires j + k <= n + 1"; break;
                    case Block::B22: msg << "strictly upper triangular requires j > k"; break;
                }
                out.push_back({"structure", b, k + 1, j + 1, nan, msg.str()});
            }

    const Envelope env = pot.envelope();
    if (!(env.C >= 0.0) || !(env.eps > 0.0)) {
        out.push_back({"envelope", Block::B11, 0, 0, nan, "envelope constants must satisfy C >= 0, eps > 0"});
        return out;
    }
    const double x_max = std::max(truncation_length(env, opts.tail_tol), opts.check_step);
    for (Block b : kAllBlocks)
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j) {
                const auto& p = pot.entry(b, k, j);
                if (p.is_zero()) continue;
                if (p.decay_rate() < env.eps * (1.0 - 1e-12)) {
                    out.push_back({"envelope", b, k + 1, j + 1, nan,
                                   potential_block_name(b) + " decays slower than the declared eps"});
                    continue;
                }
                for (double x = 0.0; x <= x_max + 1e-12; x += opts.check_step) {
                    const double bound = env.C * std::exp(-env.eps * x);
                    if (std::abs(p(x)) > bound * (1.0 + opts.slack) + 1e-300) {
                        std::ostringstream msg;
                        msg << potential_block_name(b) << "(" << k + 1 << "," << j + 1
                            << ") exceeds C e^{-eps x} at x = " << x;
                        out.push_back({"envelope", b, k + 1, j + 1, x, msg.str()});
                        break;
                    }
                }
            }
    return out;
}

// ---------------------------------------------------------------------------

BoundaryMatrix::BoundaryMatrix(Mat h, double singular_tol) : h_(std::move(h)) {
    if (h_.rows() != h_.cols() || h_.rows() == 0) throw InvalidArgument("boundary matrix must be square");
    const cplx det = h_.determinant();
    if (!(std::abs(det) > singular_tol))
        throw SingularH("boundary matrix is singular", {{"abs_det", std::abs(det)}});
    inv_ = h_.inverse();
}

}  // namespace isp
