#include <algorithm>
#include <atomic>
#include <thread>

#include "ddiff/errors.hpp"
#include "ddiff/solver.hpp"

namespace ddiff {

Problem make_problem(ForwardModelPtr model, ScoreFactory score, Tensor y, std::uint64_t seed, std::size_t index) {
  return Problem{std::move(model), std::move(score), std::move(y), derive_stream(seed, index)};
}

std::vector<BatchResult> solve_batch(const std::vector<SolverConfig>& cfgs, const std::vector<Problem>& problems,
                                     unsigned workers) {
  if (cfgs.size() != 1 && cfgs.size() != problems.size())
    throw InvalidArgument("solve_batch: need one config per problem or a single shared config");
  std::vector<BatchResult> results(problems.size());

  auto run_one = [&](std::size_t i) {
    const Problem& p = problems[i];
    SolverConfig cfg = cfgs.size() == 1 ? cfgs[0] : cfgs[i];
    cfg.stream = p.stream;
    BatchResult& out = results[i];
    try {
      auto score = p.score();
      out.result = solve(cfg, *p.model, *score, p.y);
      out.ok = true;
    } catch (const std::exception& e) {
      out.ok = false;
      out.error = e.what();
    }
  };

  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(problems.size())));
  if (workers <= 1) {
    for (std::size_t i = 0; i < problems.size(); ++i) run_one(i);
    return results;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < problems.size(); i = next++) run_one(i);
    });
  pool.clear();
  return results;
}

}  // namespace ddiff
