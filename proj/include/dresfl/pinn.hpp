#ifndef DRESFL_PINN_HPP
#define DRESFL_PINN_HPP

#include <gmpxx.h>

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "dresfl/field.hpp"
#include "dresfl/matrix.hpp"

namespace dresfl {

// MLP with quadratic activations between consecutive affine layers. With L
// activation layers the MSE gradient is a polynomial of degree 2^{L+1} in the
// data, which is what makes it computable on Lagrange-coded shares.
struct PinnArch {
    std::vector<std::size_t> layer_dims;  // [d_x, h_1, ..., h_L, d_y]

    PinnArch() = default;
    explicit PinnArch(std::vector<std::size_t> dims);

    int n_activations() const { return static_cast<int>(layer_dims.size()) - 2; }
    int n_affine() const { return static_cast<int>(layer_dims.size()) - 1; }
    std::size_t input_dim() const { return layer_dims.front(); }
    std::size_t output_dim() const { return layer_dims.back(); }
    std::size_t param_count() const;

    bool operator==(const PinnArch& other) const { return layer_dims == other.layer_dims; }
};

// deg(g) = 2^{L+1} for L quadratic activation layers.
int degree_of_gradient(int n_activations);

// Upper bound on |any intermediate or gradient entry| of the integer-carrier
// computation, by interval propagation. Callers require bound <= (p-1)/2.
mpz_class capacity_bound(const PinnArch& arch, const mpz_class& max_abs_input,
                         const mpz_class& max_abs_weight, const mpz_class& max_abs_target,
                         std::size_t batch_rows);

template <typename T>
T carrier_zero(const T&) {
    return T(0);
}
template <>
inline FieldElement carrier_zero<FieldElement>(const FieldElement& like) {
    return field_zero(like);
}

template <typename T>
struct PinnModel {
    PinnArch arch;
    std::vector<Matrix<T>> weights;  // W_l: d_l x d_{l-1}
    std::vector<std::vector<T>> biases;

    // Flat parameter vector, ordered (W_1 row-major, b_1, ..., W_{L+1}, b_{L+1}).
    std::vector<T> flatten() const;
    static PinnModel unflatten(const PinnArch& arch, const std::vector<T>& flat);

    // Samples as rows; affine -> square -> ... -> affine.
    Matrix<T> forward(const Matrix<T>& x) const;

    // Exact gradient of the summed squared error over the batch, flattened.
    std::vector<T> gradient(const Matrix<T>& x, const Matrix<T>& y) const;
};

// Integer weights uniform in [-bound, bound], drawn in fixed layer order.
PinnModel<mpz_class> init_integer_model(const PinnArch& arch, long bound, std::mt19937_64& rng);

PinnModel<FieldElement> embed_model(const PinnModel<mpz_class>& m, const FieldParams& params);
PinnModel<mpz_class> unembed_model(const PinnModel<FieldElement>& m);
PinnModel<double> realize_model(const PinnModel<mpz_class>& m);

// Checkpoint: text header (arch + modulus expression), binary signed params.
void save_checkpoint(const PinnModel<mpz_class>& m, const std::string& modulus_expr,
                     std::ostream& out);
PinnModel<mpz_class> load_checkpoint(std::istream& in, std::string* modulus_expr);

// --- template definitions ---

template <typename T>
std::vector<T> PinnModel<T>::flatten() const {
    std::vector<T> flat;
    flat.reserve(arch.param_count());
    for (int l = 0; l < arch.n_affine(); ++l) {
        for (std::size_t r = 0; r < weights[l].rows(); ++r)
            for (std::size_t c = 0; c < weights[l].cols(); ++c) flat.push_back(weights[l](r, c));
        for (const T& b : biases[l]) flat.push_back(b);
    }
    return flat;
}

template <typename T>
PinnModel<T> PinnModel<T>::unflatten(const PinnArch& arch, const std::vector<T>& flat) {
    if (flat.size() != arch.param_count()) throw DomainError("parameter vector length mismatch");
    PinnModel<T> m;
    m.arch = arch;
    std::size_t at = 0;
    for (int l = 0; l < arch.n_affine(); ++l) {
        std::size_t out_d = arch.layer_dims[l + 1], in_d = arch.layer_dims[l];
        Matrix<T> w(out_d, in_d);
        for (std::size_t r = 0; r < out_d; ++r)
            for (std::size_t c = 0; c < in_d; ++c) w(r, c) = flat[at++];
        std::vector<T> b(flat.begin() + at, flat.begin() + at + out_d);
        at += out_d;
        m.weights.push_back(std::move(w));
        m.biases.push_back(std::move(b));
    }
    return m;
}

template <typename T>
Matrix<T> PinnModel<T>::forward(const Matrix<T>& x) const {
    if (x.cols() != arch.input_dim()) throw DomainError("forward: input dimension mismatch");
    Matrix<T> z = x;
    for (int l = 0; l < arch.n_affine(); ++l) {
        const Matrix<T>& w = weights[l];
        Matrix<T> a(z.rows(), w.rows());
        for (std::size_t r = 0; r < z.rows(); ++r) {
            for (std::size_t o = 0; o < w.rows(); ++o) {
                T acc = biases[l][o];
                for (std::size_t c = 0; c < w.cols(); ++c) acc += w(o, c) * z(r, c);
                a(r, o) = acc;
            }
        }
        if (l + 1 < arch.n_affine()) {
            for (T& v : a.data()) v *= v;
        }
        z = std::move(a);
    }
    return z;
}

template <typename T>
std::vector<T> PinnModel<T>::gradient(const Matrix<T>& x, const Matrix<T>& y) const {
    if (x.rows() != y.rows()) throw DomainError("gradient: X/Y row count mismatch");
    if (x.rows() == 0) throw DomainError("gradient: empty batch");
    if (x.cols() != arch.input_dim() || y.cols() != arch.output_dim()) {
        throw DomainError("gradient: dimension mismatch");
    }
    const int n_aff = arch.n_affine();
    // Forward pass keeping pre-activations A_l and activated outputs Z_l.
    std::vector<Matrix<T>> pre(n_aff), act(n_aff + 1);
    act[0] = x;
    for (int l = 0; l < n_aff; ++l) {
        const Matrix<T>& w = weights[l];
        Matrix<T> a(act[l].rows(), w.rows());
        for (std::size_t r = 0; r < a.rows(); ++r) {
            for (std::size_t o = 0; o < w.rows(); ++o) {
                T acc = biases[l][o];
                for (std::size_t c = 0; c < w.cols(); ++c) acc += w(o, c) * act[l](r, c);
                a(r, o) = acc;
            }
        }
        pre[l] = a;
        if (l + 1 < n_aff) {
            for (T& v : a.data()) v *= v;
        }
        act[l + 1] = std::move(a);
    }

    // delta = 2*(out - y), then chain back through affine and squaring layers.
    Matrix<T> delta(y.rows(), y.cols());
    for (std::size_t r = 0; r < y.rows(); ++r) {
        for (std::size_t c = 0; c < y.cols(); ++c) {
            T d = act[n_aff](r, c) - y(r, c);
            delta(r, c) = d + d;
        }
    }

    std::vector<Matrix<T>> grad_w(n_aff);
    std::vector<std::vector<T>> grad_b(n_aff);
    for (int l = n_aff - 1; l >= 0; --l) {
        const Matrix<T>& zin = act[l];
        grad_w[l] = Matrix<T>(weights[l].rows(), weights[l].cols());
        grad_b[l].resize(weights[l].rows());
        for (std::size_t o = 0; o < weights[l].rows(); ++o) {
            T bacc = carrier_zero(delta(0, o));
            for (std::size_t r = 0; r < delta.rows(); ++r) bacc += delta(r, o);
            grad_b[l][o] = bacc;
            for (std::size_t c = 0; c < weights[l].cols(); ++c) {
                T acc = carrier_zero(delta(0, o));
                for (std::size_t r = 0; r < delta.rows(); ++r) acc += delta(r, o) * zin(r, c);
                grad_w[l](o, c) = acc;
            }
        }
        if (l > 0) {
            // Through W_l, then through the squaring activation: dz'/dz = 2*A.
            Matrix<T> prev(delta.rows(), weights[l].cols());
            for (std::size_t r = 0; r < delta.rows(); ++r) {
                for (std::size_t c = 0; c < weights[l].cols(); ++c) {
                    T acc = carrier_zero(delta(0, 0));
                    for (std::size_t o = 0; o < weights[l].rows(); ++o)
                        acc += delta(r, o) * weights[l](o, c);
                    T twice_a = pre[l - 1](r, c) + pre[l - 1](r, c);
                    prev(r, c) = acc * twice_a;
                }
            }
            delta = std::move(prev);
        }
    }

    PinnModel<T> g;
    g.arch = arch;
    g.weights = std::move(grad_w);
    g.biases = std::move(grad_b);
    return g.flatten();
}

}  // namespace dresfl

#endif
