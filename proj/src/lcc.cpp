#include "dresfl/lcc.hpp"

#include <algorithm>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

namespace dresfl {

std::pair<std::vector<FieldElement>, std::vector<FieldElement>> gen_eval_points(
    int n_clients, int shards, int privacy, const FieldParams& params) {
    long total = static_cast<long>(n_clients) + shards + privacy;
    if (mpz_class(total) >= params.modulus()) {
        throw ConfigError("field too small: need " + std::to_string(total) +
                          " distinct nonzero points in F_p with p = " + params.expression());
    }
    std::vector<FieldElement> betas, alphas;
    betas.reserve(shards + privacy);
    alphas.reserve(n_clients);
    for (long v = 1; v <= shards + privacy; ++v) betas.emplace_back(mpz_class(v), params);
    for (long v = shards + privacy + 1; v <= total; ++v) alphas.emplace_back(mpz_class(v), params);
    return {std::move(alphas), std::move(betas)};
}

CodingConfig CodingConfig::create(int n_clients, int shards, int privacy, int grad_degree,
                                  const FieldParams& params) {
    CodingConfig cfg;
    cfg.n_clients = n_clients;
    cfg.shards = shards;
    cfg.privacy = privacy;
    cfg.grad_degree = grad_degree;
    cfg.params = &params;
    std::tie(cfg.alphas, cfg.betas) = gen_eval_points(n_clients, shards, privacy, params);
    cfg.validate();
    return cfg;
}

void CodingConfig::validate() const {
    if (shards < 1 || privacy < 0 || grad_degree < 1 || n_clients < 1) {
        throw ConfigError("coding parameters out of range (need K>=1, T>=0, deg_g>=1, N>=1)");
    }
    if (decode_threshold() > n_clients) {
        throw ConfigError("infeasible coding scheme: deg_g*(K+T-1)+1 = " +
                          std::to_string(decode_threshold()) + " exceeds N = " +
                          std::to_string(n_clients));
    }
    if (static_cast<int>(alphas.size()) != n_clients ||
        static_cast<int>(betas.size()) != shards + privacy) {
        throw ConfigError("evaluation point counts do not match (N, K+T)");
    }
    std::vector<mpz_class> all;
    for (const auto& a : alphas) all.push_back(a.residue());
    for (const auto& b : betas) all.push_back(b.residue());
    std::sort(all.begin(), all.end());
    if (std::adjacent_find(all.begin(), all.end()) != all.end()) {
        throw ConfigError("evaluation points are not pairwise distinct");
    }
}

std::vector<FieldElement> lagrange_basis_at(const std::vector<FieldElement>& xs,
                                            const FieldElement& target) {
    const std::size_t n = xs.size();
    if (n == 0) throw DomainError("empty interpolation node set");
    std::vector<FieldElement> basis(n);
    for (std::size_t k = 0; k < n; ++k) {
        FieldElement num(1, *xs[k].params());
        FieldElement den(1, *xs[k].params());
        for (std::size_t j = 0; j < n; ++j) {
            if (j == k) continue;
            num *= target - xs[j];
            FieldElement diff = xs[k] - xs[j];
            if (diff.is_zero()) throw DomainError("duplicate interpolation nodes");
            den *= diff;
        }
        basis[k] = num * den.inv();
    }
    return basis;
}

std::vector<FieldMatrix> encode_dataset(const std::vector<FieldMatrix>& shards,
                                        const std::vector<FieldMatrix>& masks,
                                        const std::vector<FieldElement>& betas,
                                        const std::vector<FieldElement>& alphas) {
    if (shards.empty()) throw DomainError("encode_dataset: no shards");
    if (betas.size() != shards.size() + masks.size()) {
        throw DomainError("encode_dataset: |betas| != K+T");
    }
    for (const auto& m : shards)
        if (!m.same_shape(shards.front())) throw DomainError("encode_dataset: shard shape mismatch");
    for (const auto& m : masks)
        if (!m.same_shape(shards.front())) throw DomainError("encode_dataset: mask shape mismatch");

    const std::size_t rows = shards.front().rows(), cols = shards.front().cols();
    std::vector<FieldMatrix> out;
    out.reserve(alphas.size());
    for (const auto& alpha : alphas) {
        std::vector<FieldElement> basis = lagrange_basis_at(betas, alpha);
        FieldMatrix enc(rows, cols, FieldElement(0, *alpha.params()));
        for (std::size_t k = 0; k < betas.size(); ++k) {
            const FieldMatrix& value = k < shards.size() ? shards[k] : masks[k - shards.size()];
            for (std::size_t r = 0; r < rows; ++r)
                for (std::size_t c = 0; c < cols; ++c) enc(r, c) += basis[k] * value(r, c);
        }
        out.push_back(std::move(enc));
    }
    return out;
}

std::vector<FieldElement> lagrange_interpolate_eval(
    const std::vector<std::pair<FieldElement, std::vector<FieldElement>>>& points,
    const FieldElement& target) {
    if (points.empty()) throw DomainError("interpolation needs at least one point");
    std::vector<FieldElement> xs;
    xs.reserve(points.size());
    for (const auto& [x, y] : points) {
        xs.push_back(x);
        if (y.size() != points.front().second.size()) {
            throw DomainError("interpolation value vectors differ in length");
        }
    }
    std::vector<FieldElement> basis = lagrange_basis_at(xs, target);
    std::vector<FieldElement> result(points.front().second.size(),
                                     FieldElement(0, *target.params()));
    for (std::size_t k = 0; k < points.size(); ++k) {
        for (std::size_t c = 0; c < result.size(); ++c) {
            result[c] += basis[k] * points[k].second[c];
        }
    }
    return result;
}

std::optional<std::vector<std::vector<FieldElement>>> decode_gradients(
    const std::map<int, std::vector<FieldElement>>& uploads, const CodingConfig& cfg) {
    const std::size_t need = static_cast<std::size_t>(cfg.decode_threshold());
    if (uploads.size() < need) return std::nullopt;

    // Lowest client ids; std::map iterates in id order.
    std::vector<std::pair<FieldElement, std::vector<FieldElement>>> points;
    points.reserve(need);
    for (const auto& [id, grad] : uploads) {
        if (id < 0 || id >= cfg.n_clients) throw DomainError("upload from unknown client id");
        points.emplace_back(cfg.alphas[id], grad);
        if (points.size() == need) break;
    }
    std::vector<std::vector<FieldElement>> decoded;
    decoded.reserve(cfg.shards);
    for (int k = 0; k < cfg.shards; ++k) {
        decoded.push_back(lagrange_interpolate_eval(points, cfg.betas[k]));
    }
    return decoded;
}

ShareSet ShareSet::build(const std::vector<FieldMatrix>& local_x,
                         const std::vector<FieldMatrix>& local_y, const CodingConfig& cfg,
                         std::uint64_t mask_seed) {
    const int n = cfg.n_clients, k = cfg.shards, t = cfg.privacy;
    if (static_cast<int>(local_x.size()) != n || static_cast<int>(local_y.size()) != n) {
        throw DomainError("ShareSet::build: need one local dataset per client");
    }
    ShareSet set;
    set.n_clients = n;
    set.shards = k;
    set.privacy = t;
    set.x_enc.resize(n);
    set.y_enc.resize(n);
    set.x_masks.resize(n);
    set.y_masks.resize(n);
    for (int i = 0; i < n; ++i) {
        const FieldMatrix& xi = local_x[i];
        const FieldMatrix& yi = local_y[i];
        if (xi.rows() != yi.rows()) throw DomainError("X/Y row count mismatch at client");
        if (xi.rows() % k != 0) {
            throw DomainError("client sample count " + std::to_string(xi.rows()) +
                              " not divisible by K = " + std::to_string(k));
        }
        const std::size_t shard_rows = xi.rows() / k;
        std::vector<FieldMatrix> x_shards, y_shards;
        for (int s = 0; s < k; ++s) {
            std::vector<std::size_t> idx(shard_rows);
            for (std::size_t r = 0; r < shard_rows; ++r) idx[r] = s * shard_rows + r;
            x_shards.push_back(xi.select_rows(idx));
            y_shards.push_back(yi.select_rows(idx));
        }
        FieldStream stream(mix_seed(mask_seed, static_cast<std::uint64_t>(i)));
        for (int m = 0; m < t; ++m) {
            FieldMatrix ux(shard_rows, xi.cols()), vy(shard_rows, yi.cols());
            for (std::size_t r = 0; r < shard_rows; ++r)
                for (std::size_t c = 0; c < xi.cols(); ++c) ux(r, c) = stream.next(*cfg.params);
            for (std::size_t r = 0; r < shard_rows; ++r)
                for (std::size_t c = 0; c < yi.cols(); ++c) vy(r, c) = stream.next(*cfg.params);
            set.x_masks[i].push_back(std::move(ux));
            set.y_masks[i].push_back(std::move(vy));
        }
        set.x_enc[i] = encode_dataset(x_shards, set.x_masks[i], cfg.betas, cfg.alphas);
        set.y_enc[i] = encode_dataset(y_shards, set.y_masks[i], cfg.betas, cfg.alphas);
    }
    return set;
}

FieldMatrix ShareSet::x_at(int j) const {
    std::vector<FieldMatrix> blocks;
    for (int i = 0; i < n_clients; ++i) blocks.push_back(x_enc[i][j]);
    return FieldMatrix::vstack(blocks);
}

FieldMatrix ShareSet::y_at(int j) const {
    std::vector<FieldMatrix> blocks;
    for (int i = 0; i < n_clients; ++i) blocks.push_back(y_enc[i][j]);
    return FieldMatrix::vstack(blocks);
}

namespace {

void write_u64(std::ostream& out, std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t read_u64(std::istream& in) {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), 8);
    if (!in) throw IoError("truncated share record");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
}

// Residue as a length-prefixed little-endian byte block.
void write_residue(std::ostream& out, const mpz_class& v) {
    std::size_t count = 0;
    std::string buf((mpz_sizeinbase(v.get_mpz_t(), 2) + 7) / 8, '\0');
    mpz_export(buf.data(), &count, -1, 1, 0, 0, v.get_mpz_t());
    write_u64(out, count);
    out.write(buf.data(), static_cast<std::streamsize>(count));
}

mpz_class read_residue(std::istream& in) {
    std::uint64_t len = read_u64(in);
    std::string buf(len, '\0');
    in.read(buf.data(), static_cast<std::streamsize>(len));
    if (!in) throw IoError("truncated share record");
    mpz_class v;
    mpz_import(v.get_mpz_t(), len, -1, 1, 0, 0, buf.data());
    return v;
}

void write_matrix(std::ostream& out, const FieldMatrix& m) {
    write_u64(out, m.rows());
    write_u64(out, m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) write_residue(out, m(r, c).residue());
}

FieldMatrix read_matrix(std::istream& in, const FieldParams& params) {
    std::uint64_t rows = read_u64(in), cols = read_u64(in);
    FieldMatrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) m(r, c) = FieldElement(read_residue(in), params);
    return m;
}

constexpr std::uint64_t kShareMagic = 0x4c4343534841524bULL;  // "LCCSHARK"

}  // namespace

void ShareSet::save(std::ostream& out) const {
    write_u64(out, kShareMagic);
    write_u64(out, static_cast<std::uint64_t>(n_clients));
    write_u64(out, static_cast<std::uint64_t>(shards));
    write_u64(out, static_cast<std::uint64_t>(privacy));
    for (int i = 0; i < n_clients; ++i) {
        write_u64(out, static_cast<std::uint64_t>(i));
        for (int j = 0; j < n_clients; ++j) {
            write_matrix(out, x_enc[i][j]);
            write_matrix(out, y_enc[i][j]);
        }
        for (int t = 0; t < privacy; ++t) {
            write_matrix(out, x_masks[i][t]);
            write_matrix(out, y_masks[i][t]);
        }
    }
    if (!out) throw IoError("failed writing share record");
}

ShareSet ShareSet::load(std::istream& in, const FieldParams& params) {
    if (read_u64(in) != kShareMagic) throw IoError("not a share record");
    ShareSet set;
    set.n_clients = static_cast<int>(read_u64(in));
    set.shards = static_cast<int>(read_u64(in));
    set.privacy = static_cast<int>(read_u64(in));
    set.x_enc.resize(set.n_clients);
    set.y_enc.resize(set.n_clients);
    set.x_masks.resize(set.n_clients);
    set.y_masks.resize(set.n_clients);
    for (int i = 0; i < set.n_clients; ++i) {
        if (read_u64(in) != static_cast<std::uint64_t>(i)) throw IoError("client id out of order");
        for (int j = 0; j < set.n_clients; ++j) {
            set.x_enc[i].push_back(read_matrix(in, params));
            set.y_enc[i].push_back(read_matrix(in, params));
        }
        for (int t = 0; t < set.privacy; ++t) {
            set.x_masks[i].push_back(read_matrix(in, params));
            set.y_masks[i].push_back(read_matrix(in, params));
        }
    }
    return set;
}

}  // namespace dresfl
