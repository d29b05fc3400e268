#include "kinetic/quad.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <string>
#include <vector>

#include "kinetic/errors.hpp"

namespace kinetic::quad {

namespace {

// Gauss–Kronrod 10/21 abscissae and weights (QUADPACK dqk21).
constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0};
constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077958109831074, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kUflow = std::numeric_limits<double>::min();

struct Segment
{
  double a;
  double b;
  double value;
  double error;
  double resabs;

  bool operator<(const Segment& other) const { return error < other.error; }
};

class Evaluator
{
 public:
  Evaluator(const Integrand& f, std::size_t budget)
      : f_(f)
      , budget_(budget)
  {
  }

  double operator()(double x)
  {
    ++count_;
    const double y = f_(x);
    if (!std::isfinite(y)) {
      throw NonConvergence("quad: integrand is not finite at x = " + std::to_string(x));
    }
    return y;
  }

  std::size_t count() const { return count_; }
  bool exhausted() const { return count_ + 21 > budget_; }

 private:
  const Integrand& f_;
  std::size_t budget_;
  std::size_t count_ = 0;
};

Segment kronrod21(Evaluator& f, double a, double b)
{
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);

  double resg = 0.0;
  double resk = kWgk[10] * fc;
  double resabs = std::abs(resk);
  std::array<double, 10> fv1{};
  std::array<double, 10> fv2{};

  for (int j = 0; j < 10; ++j) {
    const double dx = half * kXgk[j];
    fv1[j] = f(center - dx);
    fv2[j] = f(center + dx);
    const double sum = fv1[j] + fv2[j];
    resk += kWgk[j] * sum;
    resabs += kWgk[j] * (std::abs(fv1[j]) + std::abs(fv2[j]));
    // odd Kronrod indices coincide with the Gauss nodes
    if (j % 2 == 1) {
      resg += kWg[j / 2] * sum;
    }
  }

  const double reskh = 0.5 * resk;
  double resasc = kWgk[10] * std::abs(fc - reskh);
  for (int j = 0; j < 10; ++j) {
    resasc += kWgk[j] * (std::abs(fv1[j] - reskh) + std::abs(fv2[j] - reskh));
  }

  const double ahalf = std::abs(half);
  const double value = resk * half;
  resabs *= ahalf;
  resasc *= ahalf;
  double err = std::abs((resk - resg) * half);
  if (resasc != 0.0 && err != 0.0) {
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  }
  if (resabs > kUflow / (50.0 * kEps)) {
    err = std::max(50.0 * kEps * resabs, err);
  }
  return {a, b, value, err, resabs};
}

double target(const QuadOptions& opt, double value)
{
  return std::max(opt.abs_tol, opt.rel_tol * std::abs(value));
}

QuadResult refine(Evaluator& f, std::vector<Segment> initial, const QuadOptions& opt)
{
  std::priority_queue<Segment> active(std::less<Segment>{}, std::move(initial));
  std::vector<Segment> frozen;

  auto totals = [&] {
    double v = 0.0;
    double e = 0.0;
    auto copy = active;
    while (!copy.empty()) {
      v += copy.top().value;
      e += copy.top().error;
      copy.pop();
    }
    for (const auto& s : frozen) {
      v += s.value;
      e += s.error;
    }
    return std::pair{v, e};
  };

  auto [value, error] = totals();
  std::size_t since_resum = 0;

  while (error > target(opt, value)) {
    if (active.empty()) {
      throw NonConvergence("quad: error estimate " + std::to_string(error) +
                           " stalled above tolerance (intervals at machine resolution)");
    }
    if (f.exhausted()) {
      throw NonConvergence("quad: evaluation budget of " + std::to_string(opt.max_evaluations) +
                           " exhausted with error estimate " + std::to_string(error));
    }
    const Segment worst = active.top();
    active.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b) ||
        (worst.b - worst.a) < 100.0 * kEps * std::max(std::abs(worst.a), std::abs(worst.b))) {
      frozen.push_back(worst);
      continue;
    }
    const Segment left = kronrod21(f, worst.a, mid);
    const Segment right = kronrod21(f, mid, worst.b);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    active.push(left);
    active.push(right);

    // incremental sums drift; resum from scratch now and then
    if (++since_resum == 256) {
      std::tie(value, error) = totals();
      since_resum = 0;
    }
  }
  std::tie(value, error) = totals();
  return {value, error, f.count()};
}

}  // namespace

QuadResult integrate(const Integrand& f, double a, double b, const QuadOptions& options)
{
  if (!(a < b)) {
    throw InvalidDomain("quad: require a < b, got a = " + std::to_string(a) +
                        ", b = " + std::to_string(b));
  }

  if (!options.singular_at_a) {
    Evaluator eval(f, options.max_evaluations);
    return refine(eval, {kronrod21(eval, a, b)}, options);
  }

  // x = a + exp(-u),  dx = exp(-u) du,  u in [-log(b - a), inf)
  const Integrand g = [&f, a](double u) {
    const double w = std::exp(-u);
    return w == 0.0 ? 0.0 : f(a + w) * w;
  };
  Evaluator eval(g, options.max_evaluations);

  // Beyond u_max the node a + exp(-u) no longer differs from a.
  double u_max = 700.0;
  if (a != 0.0) {
    u_max = std::min(u_max, -std::log(4.0 * kEps * std::abs(a)));
  }

  std::vector<Segment> chunks;
  double u = -std::log(b - a);
  double length = 1.0;
  double running = 0.0;
  while (true) {
    const double next = std::min(u + length, u_max);
    if (!(next > u)) {
      break;
    }
    const Segment chunk = kronrod21(eval, u, next);
    chunks.push_back(chunk);
    running += chunk.value;
    u = next;
    length *= 2.0;
    if (chunks.size() >= 2 && chunk.resabs <= 1e-3 * target(options, running)) {
      break;
    }
    if (u >= u_max) {
      if (chunk.resabs > target(options, running)) {
        throw NonConvergence("quad: transformed integrand does not decay near the singular endpoint");
      }
      break;
    }
  }
  return refine(eval, std::move(chunks), options);
}

QuadResult integrate(const Integrand& f, double a, double b, double tol, bool singular_at_a)
{
  QuadOptions options;
  options.abs_tol = tol;
  options.rel_tol = tol;
  options.singular_at_a = singular_at_a;
  return integrate(f, a, b, options);
}

}  // namespace kinetic::quad
