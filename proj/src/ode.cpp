#include "agepath/ode.hpp"

#include <boost/math/tools/toms748_solve.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace agepath {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
// continuous extension
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

struct Step {
  Vector y;
  Vector f;
  Vector dk;  // h * sum d_i k_i, the quartic term of the dense output
  double err = 0.0;
  bool finite = true;
};

class Stepper {
 public:
  explicit Stepper(const IvpSpec& s) : spec_(s) {}

  Vector eval(double t, const Vector& y) {
    ++evals;
    return spec_.rhs(t, y);
  }

  // One DP step of size h from (t, y) with derivative f.
  Step step(double t, const Vector& y, const Vector& f, double h) {
    Step out;
    const Vector k1 = f;
    const Vector k2 = eval(t + c2 * h, y + h * (a21 * k1));
    const Vector k3 = eval(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
    const Vector k4 = eval(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const Vector k5 = eval(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const Vector k6 =
        eval(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    out.y = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    if (!out.y.allFinite()) {
      out.finite = false;
      return out;
    }
    out.f = eval(t + h, out.y);
    if (!out.f.allFinite()) {
      out.finite = false;
      return out;
    }
    out.dk = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * out.f);
    const Vector e = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * out.f);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double sc = spec_.atol + spec_.rtol * std::max(std::abs(y(i)), std::abs(out.y(i)));
      const double r = e(i) / sc;
      acc += r * r;
    }
    out.err = y.size() ? std::sqrt(acc / static_cast<double>(y.size())) : 0.0;
    if (!std::isfinite(out.err)) out.finite = false;
    return out;
  }

  std::size_t evals = 0;

 private:
  const IvpSpec& spec_;
};

// Fourth-order dense output of an accepted step from a to b.
Vector dense_step(const OdeSample& a, const OdeSample& b, const Vector& dk, double t) {
  const double h = b.t - a.t;
  if (h <= 0.0) return a.y;
  const double th = (t - a.t) / h, th1 = 1.0 - th;
  const Vector dy = b.y - a.y;
  const Vector bs = h * a.dy - dy;
  return a.y + th * (dy + th1 * (bs + th * ((dy - h * b.dy - bs) + th1 * dk)));
}

int sign_of(double m) { return m > 0.0 ? 1 : (m < 0.0 ? -1 : 0); }

double rms_scaled(const Vector& v, const Vector& y, const IvpSpec& s) {
  if (v.size() == 0) return 0.0;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double r = v(i) / (s.atol + s.rtol * std::abs(y(i)));
    acc += r * r;
  }
  return std::sqrt(acc / static_cast<double>(v.size()));
}

}  // namespace

Vector hermite(const OdeSample& a, const OdeSample& b, double t) {
  const double h = b.t - a.t;
  if (h <= 0.0) return a.y;
  const double s = (t - a.t) / h;
  const double s2 = s * s, s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
  return h00 * a.y + (h10 * h) * a.dy + h01 * b.y + (h11 * h) * b.dy;
}

Vector IvpResult::dense(double t) const {
  if (trajectory.empty()) return {};
  if (t <= trajectory.front().t) return trajectory.front().y;
  if (t >= trajectory.back().t) return trajectory.back().y;
  auto it = std::upper_bound(trajectory.begin(), trajectory.end(), t,
                             [](double v, const OdeSample& s) { return v < s.t; });
  const OdeSample& b = *it;
  const OdeSample& a = *(it - 1);
  return hermite(a, b, t);
}

IvpResult integrate(const IvpSpec& spec) {
  if (!(spec.t0 < spec.t1)) throw std::invalid_argument("integrate: need t0 < t1");
  if (!(spec.rtol > 0.0) || !(spec.atol > 0.0))
    throw std::invalid_argument("integrate: tolerances must be positive");
  if (!spec.rhs) throw std::invalid_argument("integrate: missing rhs");

  IvpResult res;
  Stepper st(spec);
  const double span = spec.t1 - spec.t0;
  const double max_step = spec.max_step > 0.0 ? spec.max_step : span / 10.0;
  const double ev_tol = spec.event_tol_rel * span;
  const double min_step = std::max(1e-14 * span, 16 * std::numeric_limits<double>::epsilon() *
                                                     std::max(std::abs(spec.t0), std::abs(spec.t1)));

  double t = spec.t0;
  Vector y = spec.y0;
  Vector f = st.eval(t, y);
  if (!y.allFinite() || !f.allFinite()) {
    res.status = IvpStatus::failure;
    res.failure_reason = "non-finite rhs at start";
    res.trajectory.push_back({t, y, f});
    res.rhs_evals = st.evals;
    return res;
  }
  res.trajectory.push_back({t, y, f});

  // Monitor bookkeeping.
  const bool have_mon = static_cast<bool>(spec.monitors);
  std::vector<int> ref;
  std::vector<bool> armed;
  if (have_mon) {
    const Vector m0 = spec.monitors(t, y);
    if (!m0.allFinite()) throw std::invalid_argument("integrate: monitors non-finite at start");
    ref.resize(m0.size());
    armed = spec.armed.empty() ? std::vector<bool>(m0.size(), true) : spec.armed;
    if (armed.size() != static_cast<std::size_t>(m0.size()))
      throw std::invalid_argument("integrate: armed mask size mismatch");
    for (Eigen::Index k = 0; k < m0.size(); ++k)
      ref[k] = spec.expect_positive ? 1 : (std::abs(m0(k)) <= spec.zero_tol ? 0 : sign_of(m0(k)));
  }
  auto changed_set = [&](double tt, const Vector& yy) {
    std::vector<int> out;
    const Vector m = spec.monitors(tt, yy);
    for (Eigen::Index k = 0; k < m.size(); ++k) {
      if (!armed[k]) continue;
      const bool hit = spec.expect_positive ? m(k) < -spec.zero_tol : (ref[k] != 0 && sign_of(m(k)) != ref[k]);
      if (hit) out.push_back(static_cast<int>(k));
    }
    return out;
  };
  if (have_mon && spec.expect_positive) {
    res.event_monitors = changed_set(t, y);
    if (!res.event_monitors.empty()) {
      res.status = IvpStatus::event;
      res.t_event = t;
      res.y_event = y;
      res.rhs_evals = st.evals;
      return res;
    }
  }

  std::vector<double> stops;
  for (double s : spec.stops)
    if (s > spec.t0 && s <= spec.t1) stops.push_back(s);
  std::sort(stops.begin(), stops.end());
  stops.erase(std::unique(stops.begin(), stops.end()), stops.end());
  if (stops.empty() || stops.back() != spec.t1) stops.push_back(spec.t1);
  std::size_t next_stop = 0;

  // Initial step (Hairer & Wanner heuristic).
  double h = spec.first_step;
  if (h <= 0.0) {
    const double d0 = rms_scaled(y, y, spec), d1 = rms_scaled(f, y, spec);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 * span : 0.01 * d0 / d1;
    h0 = std::min(h0, max_step);
    const Vector y1 = y + h0 * f;
    const Vector f1 = st.eval(t + h0, y1);
    const double d2 = f1.allFinite() ? rms_scaled(f1 - f, y, spec) / h0 : 0.0;
    const double dm = std::max(d1, d2);
    const double h1 = dm <= 1e-15 ? std::max(1e-6 * span, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
    h = std::min(100 * h0, h1);
  }
  h = std::min(h, max_step);

  double err_old = 1e-4;
  bool rejected = false;
  std::size_t steps = 0;

  auto fail = [&](std::string why) {
    res.status = IvpStatus::failure;
    res.failure_reason = std::move(why);
    res.rhs_evals = st.evals;
    return res;
  };

  while (true) {
    if (++steps > spec.max_steps) return fail("step limit reached");
    const double target = stops[next_stop];
    bool lands = false;
    double hs = h;
    if (t + h >= target - 1e-12 * span) {
      hs = target - t;
      lands = true;
    }
    if (h < min_step && !lands) return fail("step size underflow at t=" + std::to_string(t));

    Step s = st.step(t, y, f, hs);
    if (!s.finite) {
      h = hs * 0.25;
      rejected = true;
      if (h < min_step) return fail("non-finite rhs near t=" + std::to_string(t));
      continue;
    }
    if (s.err > 1.0) {
      h = hs * std::max(0.2, 0.9 * std::pow(s.err, -0.2));
      rejected = true;
      continue;
    }

    const double t_new = lands ? target : t + hs;
    OdeSample a{t, y, f};
    OdeSample b{t_new, s.y, s.f};

    if (have_mon) {
      auto at = [&](double tc) { return tc >= t_new ? s.y : dense_step(a, b, s.dk, tc); };
      // scan interior dense points, then the step end
      constexpr int kChecks = 4;
      double prev = t;
      double hit = -1.0;
      for (int c = 1; c <= kChecks; ++c) {
        const double tc = c == kChecks ? t_new : t + (t_new - t) * c / kChecks;
        if (!changed_set(tc, at(tc)).empty()) {
          hit = tc;
          break;
        }
        prev = tc;
      }
      if (hit >= 0.0) {
        // signed distance of the armed monitors from firing; negative once fired
        auto phi = [&](double tt) {
          const Vector m = spec.monitors(tt, at(tt));
          double v = std::numeric_limits<double>::infinity();
          for (Eigen::Index k = 0; k < m.size(); ++k)
            if (armed[k] && (spec.expect_positive || ref[k] != 0))
              v = std::min(v, spec.expect_positive ? m(k) + spec.zero_tol : m(k) * ref[k]);
          return v;
        };
        double lo = prev, hi = hit;
        const double flo = phi(lo), fhi = phi(hi);
        if (flo > 0.0 && fhi < 0.0) {
          std::uintmax_t iters = 200;
          const auto br = boost::math::tools::toms748_solve(
              phi, lo, hi, flo, fhi, [&](double u, double v) { return v - u <= ev_tol; }, iters);
          lo = br.first;
          hi = br.second;
        }
        if (hi - lo > ev_tol || changed_set(hi, at(hi)).empty()) {
          lo = std::min(lo, hi);
          hi = hit;
          while (hi - lo > ev_tol) {
            const double mid = 0.5 * (lo + hi);
            if (changed_set(mid, at(mid)).empty())
              lo = mid;
            else
              hi = mid;
          }
        }
        res.t_event = hi;
        res.y_event = at(hi);
        res.event_monitors = changed_set(hi, res.y_event);
        const Vector fe = st.eval(hi, res.y_event);
        if (hi > t) res.trajectory.push_back({hi, res.y_event, fe});
        res.status = IvpStatus::event;
        res.rhs_evals = st.evals;
        return res;
      }
      // adopt signs for monitors that started on zero
      if (std::find(ref.begin(), ref.end(), 0) != ref.end()) {
        const Vector m = spec.monitors(t_new, s.y);
        for (Eigen::Index k = 0; k < m.size(); ++k)
          if (ref[k] == 0 && std::abs(m(k)) > spec.zero_tol) ref[k] = sign_of(m(k));
      }
    }

    t = t_new;
    y = std::move(s.y);
    f = std::move(s.f);
    res.trajectory.push_back(b);
    if (lands) {
      ++next_stop;
      if (next_stop == stops.size()) break;
    }

    // PI step-size control
    const double err = std::max(s.err, 1e-10);
    double fac = 0.9 * std::pow(err, -0.17) * std::pow(err_old, 0.04);
    fac = std::clamp(fac, 0.2, rejected ? 1.0 : 5.0);
    err_old = err;
    rejected = false;
    // a step shortened to land on a stop does not shrink the next proposal
    h = std::min((lands ? std::max(h, hs) : hs) * fac, max_step);
  }

  res.status = IvpStatus::reached_end;
  res.rhs_evals = st.evals;
  return res;
}

}  // namespace agepath
