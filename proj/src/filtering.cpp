#include "cclab/filtering.hpp"

#include <cmath>

namespace cclab {

Belief ospu(const Belief& b, const MarkovSource& source) {
  if (b.size() != source.alphabet_size())
    throw DimensionError("ospu: belief size != source alphabet size");
  return FiniteDist::normalized(Vector(source.kernel.matrix().transpose() * b.vec()));
}

FiniteDist output_predictive(const Belief& b, const EncoderMap& emap,
                             const StochKernel& channel, const MarkovSource& source) {
  if (emap.source_size() != source.alphabet_size())
    throw DimensionError("output_predictive: encoder map domain != source alphabet");
  if (emap.input_size() != channel.input_size())
    throw DimensionError("output_predictive: encoder map range != channel input alphabet");
  const Belief predicted = ospu(b, source);
  Vector q = Vector::Zero(channel.output_size());
  for (int w = 0; w < predicted.size(); ++w) {
    if (predicted(w) == 0.0) continue;
    for (int y = 0; y < channel.output_size(); ++y)
      q(y) += channel(emap(w), y) * predicted(w);
  }
  return FiniteDist::normalized(q);
}

Belief nlf(const Belief& b, int y, const EncoderMap& emap, const StochKernel& channel,
           const MarkovSource& source) {
  if (y < 0 || y >= channel.output_size()) throw DimensionError("nlf: observation out of range");
  const Belief predicted = ospu(b, source);
  Vector post(predicted.size());
  double norm = 0.0;
  for (int w = 0; w < predicted.size(); ++w) {
    post(w) = channel(emap(w), y) * predicted(w);
    norm += post(w);
  }
  if (norm == 0.0)
    throw ImpossibleObservationError("nlf: observation y=" + std::to_string(y) +
                                     " has zero predictive probability");
  return FiniteDist::normalized(post);
}

std::vector<BeliefPair> belief_trajectory(const std::vector<int>& y_seq,
                                          const std::vector<EncoderMap>& emap_seq,
                                          const MarkovSource& source,
                                          const StochKernel& channel, const Belief& initial) {
  if (y_seq.size() != emap_seq.size())
    throw DimensionError("belief_trajectory: emap sequence length != observation length");
  std::vector<BeliefPair> out;
  out.reserve(y_seq.size());
  Belief filtered = initial;
  for (size_t i = 0; i < y_seq.size(); ++i) {
    Belief predicted = ospu(filtered, source);
    filtered = nlf(filtered, y_seq[i], emap_seq[i], channel, source);
    out.push_back(BeliefPair{std::move(predicted), filtered});
  }
  return out;
}

namespace {

// Recursively sums P(w_0..w_t, y_1..y_j) over source paths, accumulating the
// marginal of w at depth `target`.
void enumerate_paths(const std::vector<int>& y_seq, const std::vector<EncoderMap>& emap_seq,
                     const MarkovSource& source, const StochKernel& channel, int j, int target,
                     int depth, int w, double prob, Vector& marginal, std::uint64_t& atoms,
                     std::uint64_t atom_cap) {
  if (prob == 0.0) return;
  if (depth == target) {
    marginal(w) += prob;
    if (++atoms > atom_cap)
      throw EnumerationLimitError("brute_force_posterior: atom cap exceeded at horizon " +
                                  std::to_string(target));
    return;
  }
  const int next_depth = depth + 1;
  for (int wn = 0; wn < source.alphabet_size(); ++wn) {
    double p = prob * source.kernel(w, wn);
    if (p == 0.0) continue;
    if (next_depth <= j) p *= channel(emap_seq[next_depth - 1](wn), y_seq[next_depth - 1]);
    enumerate_paths(y_seq, emap_seq, source, channel, j, target, next_depth, wn, p, marginal,
                    atoms, atom_cap);
  }
}

}  // namespace

Belief brute_force_posterior(const std::vector<int>& y_seq,
                             const std::vector<EncoderMap>& emap_seq,
                             const MarkovSource& source, const StochKernel& channel, int j,
                             int i, std::uint64_t atom_cap) {
  if (j < 0 || i < j) throw PreconditionError("brute_force_posterior: need 0 <= j <= i");
  if (static_cast<size_t>(j) > y_seq.size() || static_cast<size_t>(j) > emap_seq.size())
    throw DimensionError("brute_force_posterior: sequences shorter than j");
  Vector marginal = Vector::Zero(source.alphabet_size());
  std::uint64_t atoms = 0;
  for (int w0 = 0; w0 < source.alphabet_size(); ++w0)
    enumerate_paths(y_seq, emap_seq, source, channel, j, i, 0, w0, source.initial(w0), marginal,
                    atoms, atom_cap);
  if (!(marginal.sum() > 0.0))
    throw ImpossibleObservationError("brute_force_posterior: observation sequence has probability 0");
  return FiniteDist::normalized(marginal);
}

}  // namespace cclab
