#include "ivlreg/discrete_sem.hpp"

#include <stdexcept>

namespace ivlreg {

namespace {

constexpr int kMaxSweeps = 5;

std::uint8_t bernoulli(Rng& rng, double p) { return rng.uniform() < p ? 1 : 0; }

}  // namespace

DiscreteDataset discrete_xor_sem_sample(const LabelFn& label_fn,
                                        const ContentSampler& base_sampler,
                                        double e, std::int64_t n, std::uint64_t seed) {
  if (e < 0.0 || e > 1.0) throw std::invalid_argument("e must be in [0, 1]");
  if (n < 0) throw std::invalid_argument("n must be >= 0");
  DiscreteDataset out;
  out.x.reserve(size_t(n));
  out.y.reserve(size_t(n));
  for (std::int64_t i = 0; i < n; ++i) {
    Rng rng(seed_mix(seed, std::uint64_t(i)));
    const std::vector<std::uint8_t> content = base_sampler(rng);
    const std::uint8_t n_y = bernoulli(rng, 0.25);
    const std::uint8_t n_c = bernoulli(rng, e);

    std::vector<std::uint8_t> x(content.size() + 1, 0);
    for (size_t j = 0; j < content.size(); ++j) x[j + 1] = content[j];
    std::uint8_t y = 0, c = 0;
    bool converged = false;
    int sweeps = 0;
    while (sweeps < kMaxSweeps) {
      ++sweeps;
      const std::uint8_t x0_new = c;
      const std::uint8_t y_new =
          std::uint8_t((label_fn(x) ^ n_y) & 1);  // label sees the pre-sweep colour
      const std::uint8_t c_new = std::uint8_t((y_new ^ n_c) & 1);
      const bool same = x0_new == x[0] && y_new == y && c_new == c;
      x[0] = x0_new;
      y = y_new;
      c = c_new;
      if (same) {
        converged = true;
        break;
      }
    }
    if (!converged)
      throw std::runtime_error(
          "discrete sem did not reach a fixed point; label_fn likely depends on x[0]");
    out.max_sweeps = std::max(out.max_sweeps, sweeps);
    out.x.push_back(std::move(x));
    out.y.push_back(y);
  }
  return out;
}

std::vector<std::uint8_t> discrete_hard_do_y(const LabelFn& label_fn,
                                             const std::vector<std::uint8_t>& x_value,
                                             std::int64_t n, std::uint64_t seed) {
  const int label = label_fn(x_value) & 1;
  std::vector<std::uint8_t> y(static_cast<size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    Rng rng(seed_mix(seed, std::uint64_t(i)));
    y[size_t(i)] = std::uint8_t(label ^ bernoulli(rng, 0.25));
  }
  return y;
}

ContentSampler uniform_bits(int dim) {
  return [dim](Rng& rng) {
    std::vector<std::uint8_t> bits(static_cast<size_t>(dim));
    for (auto& b : bits) b = std::uint8_t(rng.next_u64() & 1);
    return bits;
  };
}

int parity_label(const std::vector<std::uint8_t>& x, int lo, int hi) {
  int p = 0;
  for (int i = lo; i < hi; ++i) p ^= x[size_t(i)] & 1;
  return p;
}

}  // namespace ivlreg
