#include "dresfl/pinn.hpp"

#include <istream>
#include <ostream>
#include <sstream>

namespace dresfl {

PinnArch::PinnArch(std::vector<std::size_t> dims) : layer_dims(std::move(dims)) {
    if (layer_dims.size() < 2) throw ConfigError("PINN needs at least input and output dims");
    for (std::size_t d : layer_dims)
        if (d < 1) throw ConfigError("PINN layer dims must be >= 1");
}

std::size_t PinnArch::param_count() const {
    std::size_t n = 0;
    for (int l = 0; l < n_affine(); ++l) {
        n += layer_dims[l + 1] * layer_dims[l] + layer_dims[l + 1];
    }
    return n;
}

int degree_of_gradient(int n_activations) {
    if (n_activations < 0) throw DomainError("negative activation count");
    return 1 << (n_activations + 1);
}

mpz_class capacity_bound(const PinnArch& arch, const mpz_class& max_abs_input,
                         const mpz_class& max_abs_weight, const mpz_class& max_abs_target,
                         std::size_t batch_rows) {
    const int n_aff = arch.n_affine();
    std::vector<mpz_class> pre_bound(n_aff);
    mpz_class worst = max_abs_input;
    mpz_class z = max_abs_input;
    for (int l = 0; l < n_aff; ++l) {
        // |W z + b| <= d_in * W * z + W.
        pre_bound[l] = arch.layer_dims[l] * max_abs_weight * z + max_abs_weight;
        if (pre_bound[l] > worst) worst = pre_bound[l];
        z = (l + 1 < n_aff) ? mpz_class(pre_bound[l] * pre_bound[l]) : pre_bound[l];
        if (z > worst) worst = z;
    }

    mpz_class delta = 2 * (z + max_abs_target);
    // Activated-output bounds feeding each affine layer.
    std::vector<mpz_class> in_bound(n_aff);
    in_bound[0] = max_abs_input;
    for (int l = 1; l < n_aff; ++l) in_bound[l] = pre_bound[l - 1] * pre_bound[l - 1];
    for (int l = n_aff - 1; l >= 0; --l) {
        mpz_class gw = batch_rows * delta * in_bound[l];
        if (gw > worst) worst = gw;
        mpz_class gb = batch_rows * delta;
        if (gb > worst) worst = gb;
        if (l > 0) {
            delta = arch.layer_dims[l + 1] * max_abs_weight * delta * 2 * pre_bound[l - 1];
            if (delta > worst) worst = delta;
        }
    }
    return worst;
}

PinnModel<mpz_class> init_integer_model(const PinnArch& arch, long bound, std::mt19937_64& rng) {
    std::uniform_int_distribution<long> dist(-bound, bound);
    PinnModel<mpz_class> m;
    m.arch = arch;
    for (int l = 0; l < arch.n_affine(); ++l) {
        std::size_t out_d = arch.layer_dims[l + 1], in_d = arch.layer_dims[l];
        IntMatrix w(out_d, in_d);
        for (std::size_t r = 0; r < out_d; ++r)
            for (std::size_t c = 0; c < in_d; ++c) w(r, c) = dist(rng);
        std::vector<mpz_class> b(out_d);
        for (auto& v : b) v = dist(rng);
        m.weights.push_back(std::move(w));
        m.biases.push_back(std::move(b));
    }
    return m;
}

PinnModel<FieldElement> embed_model(const PinnModel<mpz_class>& m, const FieldParams& params) {
    PinnModel<FieldElement> out;
    out.arch = m.arch;
    for (int l = 0; l < m.arch.n_affine(); ++l) {
        out.weights.push_back(from_signed(m.weights[l], params));
        std::vector<FieldElement> b;
        for (const auto& v : m.biases[l]) b.push_back(FieldElement::from_signed(v, params));
        out.biases.push_back(std::move(b));
    }
    return out;
}

PinnModel<mpz_class> unembed_model(const PinnModel<FieldElement>& m) {
    PinnModel<mpz_class> out;
    out.arch = m.arch;
    for (int l = 0; l < m.arch.n_affine(); ++l) {
        out.weights.push_back(to_signed(m.weights[l]));
        std::vector<mpz_class> b;
        for (const auto& v : m.biases[l]) b.push_back(v.to_signed());
        out.biases.push_back(std::move(b));
    }
    return out;
}

PinnModel<double> realize_model(const PinnModel<mpz_class>& m) {
    PinnModel<double> out;
    out.arch = m.arch;
    for (int l = 0; l < m.arch.n_affine(); ++l) {
        RealMatrix w(m.weights[l].rows(), m.weights[l].cols());
        for (std::size_t r = 0; r < w.rows(); ++r)
            for (std::size_t c = 0; c < w.cols(); ++c) w(r, c) = m.weights[l](r, c).get_d();
        std::vector<double> b;
        for (const auto& v : m.biases[l]) b.push_back(v.get_d());
        out.weights.push_back(std::move(w));
        out.biases.push_back(std::move(b));
    }
    return out;
}

void save_checkpoint(const PinnModel<mpz_class>& m, const std::string& modulus_expr,
                     std::ostream& out) {
    out << "pinn-checkpoint v1\n";
    out << "dims";
    for (std::size_t d : m.arch.layer_dims) out << ' ' << d;
    out << "\nmodulus " << modulus_expr << "\n";
    // Binary body: one signed decimal per parameter would be text; keep it
    // compact instead: sign byte + length-prefixed magnitude.
    for (const mpz_class& v : m.flatten()) {
        char sign = v < 0 ? '-' : '+';
        out.put(sign);
        mpz_class mag = abs(v);
        std::size_t count = 0;
        std::string buf((mpz_sizeinbase(mag.get_mpz_t(), 2) + 7) / 8, '\0');
        mpz_export(buf.data(), &count, -1, 1, 0, 0, mag.get_mpz_t());
        std::uint32_t len = static_cast<std::uint32_t>(count);
        for (int i = 0; i < 4; ++i) out.put(static_cast<char>(len >> (8 * i)));
        out.write(buf.data(), len);
    }
    if (!out) throw IoError("failed writing checkpoint");
}

PinnModel<mpz_class> load_checkpoint(std::istream& in, std::string* modulus_expr) {
    std::string line;
    std::getline(in, line);
    if (line != "pinn-checkpoint v1") throw IoError("not a pinn checkpoint");
    std::getline(in, line);
    std::istringstream dims_line(line);
    std::string tag;
    dims_line >> tag;
    if (tag != "dims") throw IoError("malformed checkpoint header");
    std::vector<std::size_t> dims;
    std::size_t d;
    while (dims_line >> d) dims.push_back(d);
    std::getline(in, line);
    if (line.rfind("modulus ", 0) != 0) throw IoError("malformed checkpoint header");
    if (modulus_expr) *modulus_expr = line.substr(8);

    PinnArch arch(dims);
    std::vector<mpz_class> flat(arch.param_count());
    for (mpz_class& v : flat) {
        int sign = in.get();
        std::uint32_t len = 0;
        for (int i = 0; i < 4; ++i) len |= static_cast<std::uint32_t>(in.get() & 0xff) << (8 * i);
        std::string buf(len, '\0');
        in.read(buf.data(), len);
        if (!in) throw IoError("truncated checkpoint");
        mpz_import(v.get_mpz_t(), len, -1, 1, 0, 0, buf.data());
        if (sign == '-') v = -v;
    }
    return PinnModel<mpz_class>::unflatten(arch, flat);
}

}  // namespace dresfl
