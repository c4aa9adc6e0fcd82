#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "ivlreg/rng.hpp"

namespace ivlreg {

// Cyclic SEM over bits. Feature vector layout: x[0] is the colour channel,
// the remaining entries are exogenous content bits. Mechanisms, swept to a
// fixed point per draw:
//
//   x = [c, content]            colour channel copies the confounder
//   y = label_fn(x) xor n_y     n_y ~ Bernoulli(1/4)
//   c = y xor n_c               n_c ~ Bernoulli(e)
//
// label_fn must ignore x[0] (otherwise the cycle has no fixed point for some
// draws and sampling throws). Under do(x) the outcome mean is
// 0.5 * label_fn(x) + 0.25, so rounding the interventional mean recovers the
// label while observational fits latch onto the colour channel.
using LabelFn = std::function<int(const std::vector<std::uint8_t>&)>;
using ContentSampler = std::function<std::vector<std::uint8_t>(Rng&)>;

struct DiscreteDataset {
  std::vector<std::vector<std::uint8_t>> x;
  std::vector<std::uint8_t> y;
  int max_sweeps = 0;  // worst case over draws, must stay <= 5
};

DiscreteDataset discrete_xor_sem_sample(const LabelFn& label_fn,
                                        const ContentSampler& base_sampler,
                                        double e, std::int64_t n, std::uint64_t seed);

// Outcome draws under do(x = x_value): y = label_fn(x) xor n_y.
std::vector<std::uint8_t> discrete_hard_do_y(const LabelFn& label_fn,
                                             const std::vector<std::uint8_t>& x_value,
                                             std::int64_t n, std::uint64_t seed);

// Toy pieces used by the demo: i.i.d. uniform content bits, and the parity
// of a designated index block [lo, hi).
ContentSampler uniform_bits(int dim);
int parity_label(const std::vector<std::uint8_t>& x, int lo, int hi);

}  // namespace ivlreg
