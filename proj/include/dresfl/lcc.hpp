#ifndef DRESFL_LCC_HPP
#define DRESFL_LCC_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "dresfl/field.hpp"
#include "dresfl/matrix.hpp"
#include "dresfl/rng.hpp"

namespace dresfl {

// Evaluation points and feasibility parameters of the coding scheme.
// Feasibility (deg_g * (K+T-1) + 1 <= N) is enforced at construction.
struct CodingConfig {
    int n_clients = 0;    // N
    int shards = 1;       // K
    int privacy = 0;      // T
    int grad_degree = 1;  // deg(g)
    std::vector<FieldElement> alphas;  // N points, one per client
    std::vector<FieldElement> betas;   // K+T points (shards then masks)
    const FieldParams* params = nullptr;

    static CodingConfig create(int n_clients, int shards, int privacy, int grad_degree,
                               const FieldParams& params);

    // Minimum uploads needed to interpolate the composite polynomial.
    int decode_threshold() const { return grad_degree * (shards + privacy - 1) + 1; }

    // Largest tolerable number of dropped clients: N - deg_g*(K+T-1) - 1.
    int max_dropouts() const { return n_clients - decode_threshold(); }

    void validate() const;
};

// Deterministic point assignment: betas = 1..K+T, alphas = K+T+1..K+T+N.
std::pair<std::vector<FieldElement>, std::vector<FieldElement>> gen_eval_points(
    int n_clients, int shards, int privacy, const FieldParams& params);

// Lagrange basis values l_k(target) for the node set xs.
std::vector<FieldElement> lagrange_basis_at(const std::vector<FieldElement>& xs,
                                            const FieldElement& target);

// Evaluations at each alpha of the degree-(K+T-1) matrix polynomial through
// (beta_k, shard_k) for k <= K and (beta_{K+t}, mask_t) for t <= T.
std::vector<FieldMatrix> encode_dataset(const std::vector<FieldMatrix>& shards,
                                        const std::vector<FieldMatrix>& masks,
                                        const std::vector<FieldElement>& betas,
                                        const std::vector<FieldElement>& alphas);

// Component-wise interpolation through (x_i, y_i) evaluated at target.
std::vector<FieldElement> lagrange_interpolate_eval(
    const std::vector<std::pair<FieldElement, std::vector<FieldElement>>>& points,
    const FieldElement& target);

// Interpolates the composite gradient polynomial from client uploads and
// evaluates it at beta_1..beta_K. Returns nullopt (round skip) when fewer
// than decode_threshold() uploads arrived. With more than enough uploads the
// subset with the lowest client ids is used.
std::optional<std::vector<std::vector<FieldElement>>> decode_gradients(
    const std::map<int, std::vector<FieldElement>>& uploads, const CodingConfig& cfg);

// The complete output of the data-sharing phase: per-(source, destination)
// encoded matrices plus the masks that produced them.
struct ShareSet {
    int n_clients = 0;
    int shards = 0;
    int privacy = 0;
    // x_enc[i][j] is X~_{i->j}; y_enc[i][j] is Y~_{i->j}.
    std::vector<std::vector<FieldMatrix>> x_enc, y_enc;
    // x_masks[i][t], y_masks[i][t] for t in [T].
    std::vector<std::vector<FieldMatrix>> x_masks, y_masks;

    // Builds shares for all clients. local_x[i]/local_y[i] are client i's
    // plaintext field matrices; row counts must be divisible by K. Masks are
    // drawn from a per-client stream derived from mask_seed.
    static ShareSet build(const std::vector<FieldMatrix>& local_x,
                          const std::vector<FieldMatrix>& local_y, const CodingConfig& cfg,
                          std::uint64_t mask_seed);

    // Concatenation over sources of the encodings held by destination j.
    FieldMatrix x_at(int j) const;
    FieldMatrix y_at(int j) const;

    void save(std::ostream& out) const;
    static ShareSet load(std::istream& in, const FieldParams& params);
};

}  // namespace dresfl

#endif
