#include "interp/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "interp/errors.hpp"
#include "interp/rng.hpp"

namespace interp {

GmmSpec GmmSpec::orthogonal(std::size_t k, std::size_t p, double energy) {
    GmmSpec spec;
    spec.k = k;
    spec.p = p;
    spec.means = orthogonal_means(k, p, energy);
    spec.priors.assign(k, 1.0 / static_cast<double>(k));
    return spec;
}

MlmSpec MlmSpec::isotropic(std::size_t k, std::size_t p, double energy) {
    MlmSpec spec;
    spec.k = k;
    spec.p = p;
    spec.means = orthogonal_means(k, p, energy);
    spec.spectrum.assign(p, 1.0);
    return spec;
}

std::size_t BilevelParams::dim() const {
    return static_cast<std::size_t>(std::llround(std::pow(static_cast<double>(n), m)));
}

std::size_t BilevelParams::sparsity() const {
    return static_cast<std::size_t>(std::llround(std::pow(static_cast<double>(n), r)));
}

double BilevelParams::spike_weight() const {
    return std::pow(static_cast<double>(n), -q);
}

void BilevelParams::validate() const {
    if (n < 2) throw InvalidRegimeError("bilevel: n must be at least 2");
    if (m <= 1.0) throw InvalidRegimeError("bilevel: m must exceed 1");
    if (r < 0.0 || r >= 1.0) throw InvalidRegimeError("bilevel: r must lie in [0, 1)");
    if (q <= 0.0 || q >= m - r) throw InvalidRegimeError("bilevel: q must lie in (0, m - r)");
    const std::size_t p = dim();
    const std::size_t s = sparsity();
    if (!(s < n && n < p)) throw InvalidRegimeError("bilevel: need s < n < p");
}

std::vector<double> bilevel_spectrum(const BilevelParams& params) {
    params.validate();
    const std::size_t p = params.dim();
    const std::size_t s = params.sparsity();
    const double a = params.spike_weight();
    const double lambda_h = a * static_cast<double>(p) / static_cast<double>(s);
    const double lambda_l = (1.0 - a) * static_cast<double>(p) / static_cast<double>(p - s);
    std::vector<double> lambda(p, lambda_l);
    std::fill(lambda.begin(), lambda.begin() + static_cast<std::ptrdiff_t>(s), lambda_h);
    return lambda;
}

MlmSpec bilevel_mlm_spec(const BilevelParams& params, std::size_t k) {
    MlmSpec spec;
    spec.spectrum = bilevel_spectrum(params);
    spec.p = spec.spectrum.size();
    spec.k = k;
    const std::size_t s = params.sparsity();
    if (k > s) throw InvalidRegimeError("bilevel MLM: needs k <= s spike coordinates");
    const double lambda_h = spec.spectrum.front();
    spec.means = orthogonal_means(k, spec.p, 1.0 / std::sqrt(lambda_h));
    return spec;
}

Matrix onehot_from_labels(const std::vector<int>& labels, std::size_t k) {
    Matrix y(k, labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int c = labels[i];
        if (c < 0 || static_cast<std::size_t>(c) >= k) {
            throw DimMismatchError("onehot_from_labels: label out of range");
        }
        y(static_cast<std::size_t>(c), i) = 1.0;
    }
    return y;
}

Matrix orthogonal_means(std::size_t k, std::size_t p, double energy) {
    if (p < k) throw DimMismatchError("orthogonal_means: dimension p smaller than class count k");
    if (energy <= 0.0) throw InvalidRegimeError("orthogonal_means: energy must be positive");
    Matrix m(p, k);
    for (std::size_t c = 0; c < k; ++c) m(c, c) = energy;
    return m;
}

namespace {

// First index whose cumulative probability reaches u. Strict convention so
// ties resolve identically everywhere.
int categorical(std::span<const double> priors, double u) {
    double cum = 0.0;
    for (std::size_t c = 0; c < priors.size(); ++c) {
        cum += priors[c];
        if (cum >= u) return static_cast<int>(c);
    }
    return static_cast<int>(priors.size()) - 1;
}

}  // namespace

namespace {

void validate_gmm(const GmmSpec& spec) {
    if (spec.priors.size() != spec.k || spec.means.cols() != spec.k ||
        spec.means.rows() != spec.p) {
        throw DimMismatchError("GmmSpec: inconsistent dimensions");
    }
    double sum = 0.0;
    for (double v : spec.priors) sum += v;
    if (std::fabs(sum - 1.0) > 1e-12) {
        throw InvalidRegimeError("GmmSpec: priors must sum to 1");
    }
}

void validate_mlm(const MlmSpec& spec) {
    if (spec.spectrum.size() != spec.p || spec.means.cols() != spec.k ||
        spec.means.rows() != spec.p) {
        throw DimMismatchError("MlmSpec: inconsistent dimensions");
    }
    for (double v : spec.spectrum) {
        if (!(v > 0.0)) throw InvalidRegimeError("MlmSpec: spectrum must be positive");
    }
}

}  // namespace

Dataset sample_gmm(const GmmSpec& spec, std::size_t n, std::uint64_t seed) {
    validate_gmm(spec);
    Dataset ds;
    ds.x = Matrix(spec.p, n);
    ds.labels.resize(n);
    ds.seed = seed;
    ds.provenance = "gmm";
    for (std::size_t i = 0; i < n; ++i) {
        SplitMix64 rng(derive_stream(seed, i));
        const int c = categorical(spec.priors, rng.next_double());
        ds.labels[i] = c;
        auto xi = ds.x.col(i);
        auto mu = spec.means.col(static_cast<std::size_t>(c));
        for (std::size_t j = 0; j < spec.p; ++j) xi[j] = mu[j] + rng.next_normal();
    }
    ds.onehot = onehot_from_labels(ds.labels, spec.k);
    return ds;
}

Dataset sample_gmm_balanced(const GmmSpec& spec, std::size_t n, std::uint64_t seed) {
    validate_gmm(spec);
    Dataset ds;
    ds.x = Matrix(spec.p, n);
    ds.labels.resize(n);
    ds.seed = seed;
    ds.provenance = "gmm-balanced";
    for (std::size_t i = 0; i < n; ++i) {
        SplitMix64 rng(derive_stream(seed, i));
        rng.next_double();  // keep stream positions aligned with sample_gmm
        const int c = static_cast<int>(i % spec.k);
        ds.labels[i] = c;
        auto xi = ds.x.col(i);
        auto mu = spec.means.col(static_cast<std::size_t>(c));
        for (std::size_t j = 0; j < spec.p; ++j) xi[j] = mu[j] + rng.next_normal();
    }
    ds.onehot = onehot_from_labels(ds.labels, spec.k);
    return ds;
}

Dataset sample_mlm(const MlmSpec& spec, std::size_t n, std::uint64_t seed) {
    validate_mlm(spec);
    Dataset ds;
    ds.x = Matrix(spec.p, n);
    ds.labels.resize(n);
    ds.seed = seed;
    ds.provenance = "mlm";
    std::vector<double> sqrt_lambda(spec.p);
    for (std::size_t j = 0; j < spec.p; ++j) sqrt_lambda[j] = std::sqrt(spec.spectrum[j]);
    std::vector<double> probs(spec.k);
    for (std::size_t i = 0; i < n; ++i) {
        SplitMix64 rng(derive_stream(seed, i));
        auto xi = ds.x.col(i);
        for (std::size_t j = 0; j < spec.p; ++j) xi[j] = sqrt_lambda[j] * rng.next_normal();
        Vector logits = tmatvec(spec.means, xi);
        const double top = *std::max_element(logits.begin(), logits.end());
        double total = 0.0;
        for (std::size_t c = 0; c < spec.k; ++c) {
            probs[c] = std::exp(logits[c] - top);
            total += probs[c];
        }
        for (double& v : probs) v /= total;
        ds.labels[i] = categorical(probs, rng.next_double());
    }
    ds.onehot = onehot_from_labels(ds.labels, spec.k);
    return ds;
}

Dataset neural_collapse_features(std::size_t k, std::size_t samples_per_class, std::size_t p,
                                 double alpha) {
    if (p < k) throw DimMismatchError("neural_collapse_features: p must be at least k");
    if (alpha == 0.0) throw InvalidRegimeError("neural_collapse_features: alpha must be nonzero");
    const std::size_t n = k * samples_per_class;
    // alpha * sqrt(k/n) = alpha / sqrt(m)
    const double scale = alpha / std::sqrt(static_cast<double>(samples_per_class));
    Matrix means(p, k);
    for (std::size_t c = 0; c < k; ++c) {
        for (std::size_t r = 0; r < k; ++r) {
            const double centered = (r == c ? 1.0 : 0.0) - 1.0 / static_cast<double>(k);
            means(r, c) = scale * centered;
        }
    }

    Dataset ds;
    ds.x = Matrix(p, n);
    ds.labels.resize(n);
    ds.provenance = "nc";
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t c = i % k;
        ds.labels[i] = static_cast<int>(c);
        auto src = means.col(c);
        auto dst = ds.x.col(i);
        std::copy(src.begin(), src.end(), dst.begin());
    }
    ds.onehot = onehot_from_labels(ds.labels, k);
    return ds;
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& ds) {
    std::ofstream out(path);
    if (!out) throw IoError("write_dataset_csv: cannot open " + path.string());
    const std::size_t p = ds.x.rows();
    const std::size_t n = ds.x.cols();
    const std::size_t k = ds.onehot.rows();
    out << "# " << p << "," << n << "," << k << "," << ds.seed << "\n";
    char buf[64];
    for (std::size_t i = 0; i < n; ++i) {
        out << ds.labels[i];
        auto xi = ds.x.col(i);
        for (std::size_t j = 0; j < p; ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", xi[j]);
            out << ',' << buf;
        }
        out << '\n';
    }
    if (!out) throw IoError("write_dataset_csv: short write to " + path.string());
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("read_dataset_csv: cannot open " + path.string());
    std::string header;
    std::getline(in, header);
    if (header.rfind("# ", 0) != 0) throw IoError("read_dataset_csv: missing header line");
    std::size_t p = 0, n = 0, k = 0;
    std::uint64_t seed = 0;
    if (std::sscanf(header.c_str(), "# %zu,%zu,%zu,%llu", &p, &n, &k,
                    reinterpret_cast<unsigned long long*>(&seed)) != 4) {
        throw IoError("read_dataset_csv: malformed header");
    }

    Dataset ds;
    ds.x = Matrix(p, n);
    ds.labels.resize(n);
    ds.seed = seed;
    ds.provenance = "csv:" + path.string();
    std::string line;
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::getline(in, line)) throw IoError("read_dataset_csv: truncated file");
        std::stringstream row(line);
        std::string cell;
        if (!std::getline(row, cell, ',')) throw IoError("read_dataset_csv: empty row");
        ds.labels[i] = std::stoi(cell);
        auto xi = ds.x.col(i);
        for (std::size_t j = 0; j < p; ++j) {
            if (!std::getline(row, cell, ',')) throw IoError("read_dataset_csv: short row");
            xi[j] = std::stod(cell);
        }
    }
    ds.onehot = onehot_from_labels(ds.labels, k);
    return ds;
}

}  // namespace interp
