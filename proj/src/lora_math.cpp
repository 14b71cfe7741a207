#include "inkline/lora_math.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include <nlohmann/json.hpp>

#include "inkline/errors.hpp"

namespace inkline {

namespace {

using nlohmann::json;

void validate_matrix(const Matrix& m, const std::string& what) {
    require_input(m.rows >= 0 && m.cols >= 0, what + ": negative dimensions");
    require_input(m.entries.size() == static_cast<size_t>(m.rows) *
                                          static_cast<size_t>(m.cols),
                  what + ": entries length does not match rows x cols");
    for (double v : m.entries) {
        if (!std::isfinite(v)) [[unlikely]]
            require_input(false, what + ": non-finite entry");
    }
}

void check_dim(size_t got, size_t want, const char* what) {
    require_input(got == want, std::string(what) + ": expected dimension " +
                                   std::to_string(want) + ", got " +
                                   std::to_string(got));
}

double squared_distance(const std::vector<double>& a,
                        const std::vector<double>& b) {
    double total = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        total += d * d;
    }
    return total;
}

std::vector<double> normals(Rng& rng, size_t n) {
    std::vector<double> out(n);
    for (double& v : out) v = rng.normal();
    return out;
}

}  // namespace

Matrix Matrix::zeros(int rows, int cols) {
    Matrix m;
    m.rows = rows;
    m.cols = cols;
    m.entries.assign(static_cast<size_t>(rows) * static_cast<size_t>(cols),
                     0.0);
    return m;
}

Matrix Matrix::identity(int n) {
    Matrix m = zeros(n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
}

void NoiseSchedule::validate() const {
    require_input(!alphas.empty(), "noise schedule: T must be >= 1");
    require_input(alphas.size() == sigmas.size(),
                  "noise schedule: alphas and sigmas must have equal length");
    for (size_t i = 0; i < alphas.size(); ++i) {
        require_input(alphas[i] > 0.0 && sigmas[i] > 0.0,
                      "noise schedule: coefficients must be positive");
        if (i > 0) {
            require_input(alphas[i] < alphas[i - 1],
                          "noise schedule: alphas must be strictly decreasing");
            require_input(sigmas[i] > sigmas[i - 1],
                          "noise schedule: sigmas must be strictly increasing");
        }
    }
}

NoiseSchedule NoiseSchedule::linear(int T) {
    require_input(T >= 1, "noise schedule: T must be >= 1");
    NoiseSchedule s;
    s.alphas.resize(static_cast<size_t>(T));
    s.sigmas.resize(static_cast<size_t>(T));
    for (int t = 1; t <= T; ++t) {
        double frac = static_cast<double>(t) / (static_cast<double>(T) + 1.0);
        s.alphas[static_cast<size_t>(t - 1)] = 1.0 - frac;
        s.sigmas[static_cast<size_t>(t - 1)] = frac;
    }
    s.validate();
    return s;
}

AffineDenoiser::AffineDenoiser(int image_dim, int cond_dim)
    : image_dim_(image_dim), cond_dim_(cond_dim) {
    require_input(image_dim >= 1 && cond_dim >= 1,
                  "affine denoiser: dimensions must be >= 1");
    P = Matrix::zeros(image_dim, image_dim);
    Q = Matrix::zeros(image_dim, cond_dim);
    b.assign(static_cast<size_t>(image_dim), 0.0);
}

std::vector<double> AffineDenoiser::evaluate(
    const std::vector<double>& z, const std::vector<double>& c) const {
    check_dim(z.size(), static_cast<size_t>(image_dim_), "affine denoiser latent");
    check_dim(c.size(), static_cast<size_t>(cond_dim_), "affine denoiser condition");
    std::vector<double> out(static_cast<size_t>(image_dim_));
    for (int i = 0; i < image_dim_; ++i) {
        double acc = 0.0;
        for (int j = 0; j < image_dim_; ++j)
            acc += P.at(i, j) * z[static_cast<size_t>(j)];
        for (int k = 0; k < cond_dim_; ++k)
            acc += Q.at(i, k) * c[static_cast<size_t>(k)];
        out[static_cast<size_t>(i)] = acc + b[static_cast<size_t>(i)];
    }
    return out;
}

int AffineDenoiser::param_count() const {
    return image_dim_ * image_dim_ + image_dim_ * cond_dim_ + image_dim_;
}

std::vector<double> AffineDenoiser::theta() const {
    std::vector<double> out;
    out.reserve(static_cast<size_t>(param_count()));
    out.insert(out.end(), P.entries.begin(), P.entries.end());
    out.insert(out.end(), Q.entries.begin(), Q.entries.end());
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

void AffineDenoiser::set_theta(const std::vector<double>& theta) {
    check_dim(theta.size(), static_cast<size_t>(param_count()),
              "affine denoiser theta");
    size_t np = P.entries.size();
    size_t nq = Q.entries.size();
    std::copy(theta.begin(), theta.begin() + static_cast<long>(np),
              P.entries.begin());
    std::copy(theta.begin() + static_cast<long>(np),
              theta.begin() + static_cast<long>(np + nq), Q.entries.begin());
    std::copy(theta.begin() + static_cast<long>(np + nq), theta.end(),
              b.begin());
}

namespace {

// The reserved token marking the style prompt; kept out of user vocabulary
// by the angle brackets.
constexpr const char* kIdentifierToken = "<identifier>";

std::vector<double> token_unit_vector(const std::string& token, int dim) {
    Rng rng(fnv1a64(token));
    std::vector<double> v(static_cast<size_t>(dim));
    double norm_sq = 0.0;
    for (double& x : v) {
        x = rng.normal();
        norm_sq += x * x;
    }
    require_invariant(norm_sq > 0.0, "token vector has zero norm");
    double inv = 1.0 / std::sqrt(norm_sq);
    for (double& x : v) x *= inv;
    return v;
}

}  // namespace

std::vector<double> identifier_vector(int dim) {
    require_input(dim >= 1, "encode_prompt: dimension must be >= 1");
    return token_unit_vector(kIdentifierToken, dim);
}

std::vector<double> encode_prompt(const std::vector<std::string>& tokens,
                                  bool has_identifier, int dim) {
    require_input(!tokens.empty(), "encode_prompt: token list must not be empty");
    require_input(dim >= 1, "encode_prompt: dimension must be >= 1");
    std::vector<std::string> sorted = tokens;
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> out(static_cast<size_t>(dim), 0.0);
    for (const std::string& tok : sorted) {
        std::vector<double> v = token_unit_vector(tok, dim);
        for (size_t i = 0; i < out.size(); ++i) out[i] += v[i];
    }
    if (has_identifier) {
        std::vector<double> id = identifier_vector(dim);
        for (size_t i = 0; i < out.size(); ++i) out[i] += id[i];
    }
    return out;
}

std::vector<double> add_noise(const std::vector<double>& x, int t,
                              const std::vector<double>& eps,
                              const NoiseSchedule& sched) {
    require_input(t >= 1 && t <= sched.T(),
                  "add_noise: timestep " + std::to_string(t) +
                      " out of range 1.." + std::to_string(sched.T()));
    check_dim(eps.size(), x.size(), "add_noise noise vector");
    double a = sched.alpha(t);
    double s = sched.sigma(t);
    std::vector<double> z(x.size());
    for (size_t i = 0; i < x.size(); ++i) z[i] = a * x[i] + s * eps[i];
    return z;
}

Matrix merge_lora(const Matrix& W, const MergeSpec& spec) {
    validate_matrix(W, "merge_lora: base");
    for (size_t ai = 0; ai < spec.items.size(); ++ai) {
        const LoraAdapter& ad = spec.items[ai].adapter;
        std::string tag = "merge_lora: adapter " + std::to_string(ai);
        validate_matrix(ad.B, tag + " B");
        validate_matrix(ad.A, tag + " A");
        require_input(ad.rank >= 1, tag + ": rank must be >= 1");
        require_input(ad.rank < std::min(W.rows, W.cols),
                      tag + ": rank must be below min(base dims)");
        require_input(ad.B.rows == W.rows,
                      tag + ": B has " + std::to_string(ad.B.rows) +
                          " rows but base has " + std::to_string(W.rows));
        require_input(ad.A.cols == W.cols,
                      tag + ": A has " + std::to_string(ad.A.cols) +
                          " cols but base has " + std::to_string(W.cols));
        require_input(ad.B.cols == ad.rank && ad.A.rows == ad.rank,
                      tag + ": inner dimensions do not match rank " +
                          std::to_string(ad.rank));
        require_input(std::isfinite(spec.items[ai].weight),
                      tag + ": non-finite weight");
    }

    Matrix out = W;
    for (const WeightedAdapter& wa : spec.items) {
        const Matrix& B = wa.adapter.B;
        const Matrix& A = wa.adapter.A;
        const double w = wa.weight;
        const int n = out.rows;
        const int m = out.cols;
        const int r = wa.adapter.rank;
        // Rows are independent and each entry accumulates in fixed k order,
        // so the parallel result is bitwise identical to the serial one.
        // Raw row pointers let the outlined loop body vectorize; the
        // arithmetic and its order are unchanged.
        const double* b_data = B.entries.data();
        const double* a_data = A.entries.data();
        double* out_data = out.entries.data();
#pragma omp parallel for schedule(static)
        for (int i = 0; i < n; ++i) {
            const double* b_row = b_data + static_cast<size_t>(i) * r;
            double* out_row = out_data + static_cast<size_t>(i) * m;
            for (int j = 0; j < m; ++j) {
                double acc = 0.0;
                for (int k = 0; k < r; ++k)
                    acc += b_row[k] * a_data[static_cast<size_t>(k) * m + j];
                out_row[j] += w * acc;
            }
        }
    }
    return out;
}

namespace {

void check_pair(const Denoiser& den, const TrainingPair& pair) {
    size_t d = static_cast<size_t>(den.image_dim());
    size_t c = static_cast<size_t>(den.cond_dim());
    check_dim(pair.x_style.size(), d, "training pair x_style");
    check_dim(pair.x_reg.size(), d, "training pair x_reg");
    check_dim(pair.c_style.size(), c, "training pair c_style");
    check_dim(pair.c_reg.size(), c, "training pair c_reg");
}

}  // namespace

double reconstruction_loss(const Denoiser& den, const TrainingPair& pair,
                           const std::vector<double>& eps, int t,
                           const NoiseSchedule& sched, const LossWeights& lw) {
    check_pair(den, pair);
    check_dim(eps.size(), pair.x_style.size(), "reconstruction noise");
    std::vector<double> z_style = add_noise(pair.x_style, t, eps, sched);
    std::vector<double> z_reg = add_noise(pair.x_reg, t, eps, sched);
    std::vector<double> xhat_style = den.evaluate(z_style, pair.c_style);
    std::vector<double> xhat_reg = den.evaluate(z_reg, pair.c_reg);
    return lw.lambda1 * squared_distance(xhat_style, pair.x_style) +
           lw.lambda2 * squared_distance(xhat_reg, pair.x_reg);
}

double context_consistency_loss(const Denoiser& den, const TrainingPair& pair,
                                const std::vector<double>& z_src,
                                const std::vector<double>& eps_prime,
                                int t_prime, const NoiseSchedule& sched) {
    check_pair(den, pair);
    check_dim(z_src.size(), static_cast<size_t>(den.image_dim()),
              "consistency source latent");
    check_dim(eps_prime.size(), static_cast<size_t>(den.image_dim()),
              "consistency noise");
    std::vector<double> gen_style = den.evaluate(z_src, pair.c_style);
    std::vector<double> gen_reg = den.evaluate(z_src, pair.c_reg);
    std::vector<double> z_style = add_noise(gen_style, t_prime, eps_prime, sched);
    std::vector<double> z_reg = add_noise(gen_reg, t_prime, eps_prime, sched);
    std::vector<double> y_style = den.evaluate(z_style, pair.c_style);
    std::vector<double> y_reg = den.evaluate(z_reg, pair.c_reg);
    return squared_distance(y_style, y_reg);
}

double total_loss(const Denoiser& den, const TrainingPair& pair,
                  const LossDraws& draws, const NoiseSchedule& sched,
                  const LossWeights& lw) {
    double rec = reconstruction_loss(den, pair, draws.eps, draws.t, sched, lw);
    double con = context_consistency_loss(den, pair, draws.z_src,
                                          draws.eps_prime, draws.t_prime,
                                          sched);
    return lw.w_t * rec + lw.w_t_prime * con;
}

namespace {

// grad[P | Q | b] views over a flat theta-sized buffer.
struct GradView {
    std::vector<double>& flat;
    int d;
    int c;
    double& P(int i, int j) {
        return flat[static_cast<size_t>(i) * static_cast<size_t>(d) +
                    static_cast<size_t>(j)];
    }
    double& Q(int i, int k) {
        return flat[static_cast<size_t>(d) * static_cast<size_t>(d) +
                    static_cast<size_t>(i) * static_cast<size_t>(c) +
                    static_cast<size_t>(k)];
    }
    double& b(int i) {
        return flat[static_cast<size_t>(d) * static_cast<size_t>(d) +
                    static_cast<size_t>(d) * static_cast<size_t>(c) +
                    static_cast<size_t>(i)];
    }
};

}  // namespace

std::vector<double> loss_gradient(const Denoiser& den,
                                  const TrainingPair& pair,
                                  const LossDraws& draws,
                                  const NoiseSchedule& sched,
                                  const LossWeights& lw,
                                  bool through_generation) {
    const auto* aff = dynamic_cast<const AffineDenoiser*>(&den);
    require_input(aff != nullptr,
                  "loss_gradient: analytic gradient supports only the affine "
                  "toy denoiser");
    check_pair(den, pair);
    const int d = aff->image_dim();
    const int c = aff->cond_dim();
    std::vector<double> flat(static_cast<size_t>(aff->param_count()), 0.0);
    GradView g{flat, d, c};

    // Reconstruction part: for each pair member, residual r = den(z) - x
    // gives dL/dP = 2*lambda*r*z^T, dL/dQ = 2*lambda*r*cond^T, dL/db =
    // 2*lambda*r.
    {
        std::vector<double> z_style =
            add_noise(pair.x_style, draws.t, draws.eps, sched);
        std::vector<double> z_reg =
            add_noise(pair.x_reg, draws.t, draws.eps, sched);
        std::vector<double> r_style = aff->evaluate(z_style, pair.c_style);
        std::vector<double> r_reg = aff->evaluate(z_reg, pair.c_reg);
        for (int i = 0; i < d; ++i) {
            r_style[static_cast<size_t>(i)] -= pair.x_style[static_cast<size_t>(i)];
            r_reg[static_cast<size_t>(i)] -= pair.x_reg[static_cast<size_t>(i)];
        }
        const double ws = 2.0 * lw.w_t * lw.lambda1;
        const double wr = 2.0 * lw.w_t * lw.lambda2;
        for (int i = 0; i < d; ++i) {
            double cs = ws * r_style[static_cast<size_t>(i)];
            double cr = wr * r_reg[static_cast<size_t>(i)];
            for (int j = 0; j < d; ++j)
                g.P(i, j) += cs * z_style[static_cast<size_t>(j)] +
                             cr * z_reg[static_cast<size_t>(j)];
            for (int k = 0; k < c; ++k)
                g.Q(i, k) += cs * pair.c_style[static_cast<size_t>(k)] +
                             cr * pair.c_reg[static_cast<size_t>(k)];
            g.b(i) += cs + cr;
        }
    }

    // Consistency part. With y(cond) = P*(a'*x'(cond) + s'*eps') + Q*cond + b
    // and x'(cond) = P*z_src + Q*cond + b, the branch difference is
    // diff = (a'*P + I)*Q*dc, dc = c_style - c_reg. The common z_src and b
    // terms cancel, so dL/db = 0 and dL/dP = 2*a'*diff*(dx)^T with
    // dx = x'_style - x'_reg. Through generation dL/dQ picks up the inner
    // path: 2*(a'*P^T*diff + diff)*dc^T; with x' detached only the outer
    // 2*diff*dc^T remains.
    {
        std::vector<double> gen_style = aff->evaluate(draws.z_src, pair.c_style);
        std::vector<double> gen_reg = aff->evaluate(draws.z_src, pair.c_reg);
        std::vector<double> z_style =
            add_noise(gen_style, draws.t_prime, draws.eps_prime, sched);
        std::vector<double> z_reg =
            add_noise(gen_reg, draws.t_prime, draws.eps_prime, sched);
        std::vector<double> y_style = aff->evaluate(z_style, pair.c_style);
        std::vector<double> y_reg = aff->evaluate(z_reg, pair.c_reg);

        const double alpha_p = sched.alpha(draws.t_prime);
        std::vector<double> diff(static_cast<size_t>(d));
        std::vector<double> dx(static_cast<size_t>(d));
        for (int i = 0; i < d; ++i) {
            diff[static_cast<size_t>(i)] = y_style[static_cast<size_t>(i)] -
                                           y_reg[static_cast<size_t>(i)];
            dx[static_cast<size_t>(i)] = gen_style[static_cast<size_t>(i)] -
                                         gen_reg[static_cast<size_t>(i)];
        }
        std::vector<double> dc(static_cast<size_t>(c));
        for (int k = 0; k < c; ++k)
            dc[static_cast<size_t>(k)] = pair.c_style[static_cast<size_t>(k)] -
                                         pair.c_reg[static_cast<size_t>(k)];

        const double wp = 2.0 * lw.w_t_prime;
        for (int i = 0; i < d; ++i) {
            double ci = wp * alpha_p * diff[static_cast<size_t>(i)];
            for (int j = 0; j < d; ++j)
                g.P(i, j) += ci * dx[static_cast<size_t>(j)];
        }
        // Row factor for dL/dQ: diff plus, through generation, a'*P^T*diff.
        std::vector<double> row(static_cast<size_t>(d));
        for (int a = 0; a < d; ++a) {
            double acc = diff[static_cast<size_t>(a)];
            if (through_generation) {
                double pt = 0.0;
                for (int i = 0; i < d; ++i)
                    pt += aff->P.at(i, a) * diff[static_cast<size_t>(i)];
                acc += alpha_p * pt;
            }
            row[static_cast<size_t>(a)] = wp * acc;
        }
        for (int a = 0; a < d; ++a)
            for (int k = 0; k < c; ++k)
                g.Q(a, k) += row[static_cast<size_t>(a)] * dc[static_cast<size_t>(k)];
    }

    return flat;
}

std::vector<SchedulePhase> default_schedule() {
    return {
        {1, 500, LossWeights{0.5, 0.5, 0.5, 0.5}},
        {501, 1000, LossWeights{0.5, 0.5, 0.8, 0.2}},
    };
}

FineTuneResult fine_tune(AffineDenoiser& den,
                         const std::vector<TrainingPair>& dataset,
                         const NoiseSchedule& sched,
                         const std::vector<SchedulePhase>& schedule,
                         const FineTuneOptions& options) {
    require_input(!dataset.empty(), "fine_tune: dataset must not be empty");
    sched.validate();
    for (const TrainingPair& pair : dataset) check_pair(den, pair);
    require_input(!schedule.empty(), "fine_tune: schedule must not be empty");
    require_input(schedule.front().first_iteration == 1,
                  "fine_tune: schedule must start at iteration 1");
    for (size_t i = 0; i < schedule.size(); ++i) {
        const SchedulePhase& ph = schedule[i];
        require_input(ph.last_iteration >= ph.first_iteration,
                      "fine_tune: schedule phase range is empty");
        require_input(ph.weights.lambda1 >= 0.0 && ph.weights.lambda2 >= 0.0 &&
                          ph.weights.w_t >= 0.0 && ph.weights.w_t_prime >= 0.0,
                      "fine_tune: loss weights must be non-negative");
        if (i > 0)
            require_input(
                ph.first_iteration == schedule[i - 1].last_iteration + 1,
                "fine_tune: schedule phases must be contiguous");
    }
    require_input(options.step_size >= 0.0,
                  "fine_tune: step size must be non-negative");
    require_input(options.snapshot_every >= 1,
                  "fine_tune: snapshot interval must be >= 1");

    const int total = schedule.back().last_iteration;
    const size_t d = static_cast<size_t>(den.image_dim());

    FineTuneResult result;
    result.curve.reserve(static_cast<size_t>(total));
    result.snapshot_iterations.push_back(0);
    result.theta_snapshots.push_back(den.theta());

    Rng rng(options.seed);
    size_t phase_idx = 0;
    for (int iter = 1; iter <= total; ++iter) {
        while (iter > schedule[phase_idx].last_iteration) ++phase_idx;
        const LossWeights& lw = schedule[phase_idx].weights;

        // Fixed sampling order: pair, t, t', eps, eps', z_src.
        const TrainingPair& pair = dataset[static_cast<size_t>(
            rng.uniform_int(0, dataset.size() - 1))];
        LossDraws draws;
        draws.t = static_cast<int>(
            rng.uniform_int(1, static_cast<uint64_t>(sched.T())));
        draws.t_prime = static_cast<int>(
            rng.uniform_int(1, static_cast<uint64_t>(sched.T())));
        draws.eps = normals(rng, d);
        draws.eps_prime = normals(rng, d);
        draws.z_src = normals(rng, d);

        double l_rec =
            reconstruction_loss(den, pair, draws.eps, draws.t, sched, lw);
        double l_con = context_consistency_loss(
            den, pair, draws.z_src, draws.eps_prime, draws.t_prime, sched);
        double l_tot = lw.w_t * l_rec + lw.w_t_prime * l_con;
        result.curve.push_back({iter, l_rec, l_con, l_tot, lw});
        if (!(l_tot <= 1e12)) {
            throw InputError("fine_tune: diverged at iteration " +
                             std::to_string(iter) +
                             " (loss=" + std::to_string(l_tot) +
                             "); reduce the step size");
        }

        std::vector<double> grad = loss_gradient(
            den, pair, draws, sched, lw, options.through_generation);
        std::vector<double> theta = den.theta();
        for (size_t i = 0; i < theta.size(); ++i)
            theta[i] -= options.step_size * grad[i];
        den.set_theta(theta);

        if (iter % options.snapshot_every == 0 || iter == total) {
            result.snapshot_iterations.push_back(iter);
            result.theta_snapshots.push_back(den.theta());
        }
    }
    return result;
}

namespace {

json matrix_to_json_value(const Matrix& m) {
    return json{{"rows", m.rows}, {"cols", m.cols}, {"entries", m.entries}};
}

Matrix matrix_from_json_value(const json& j, const std::string& what) {
    require_input(j.is_object(), what + ": expected a JSON object");
    require_input(j.contains("rows") && j.contains("cols") &&
                      j.contains("entries"),
                  what + ": requires rows, cols and entries");
    Matrix m;
    try {
        m.rows = j.at("rows").get<int>();
        m.cols = j.at("cols").get<int>();
        m.entries = j.at("entries").get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw InputError(what + ": " + e.what());
    }
    validate_matrix(m, what);
    return m;
}

json parse_json(const std::string& text, const char* what) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw InputError(std::string(what) + ": invalid JSON: " + e.what());
    }
}

}  // namespace

std::string matrix_to_json(const Matrix& m) {
    return matrix_to_json_value(m).dump(2) + "\n";
}

Matrix matrix_from_json(const std::string& text) {
    return matrix_from_json_value(parse_json(text, "matrix"), "matrix");
}

MergeInput merge_input_from_json(const std::string& text) {
    json j = parse_json(text, "merge input");
    require_input(j.is_object() && j.contains("base") && j.contains("adapters"),
                  "merge input: requires base and adapters");
    MergeInput input;
    input.base = matrix_from_json_value(j.at("base"), "merge input base");
    const json& ads = j.at("adapters");
    require_input(ads.is_array(), "merge input: adapters must be an array");
    for (size_t i = 0; i < ads.size(); ++i) {
        const json& item = ads[i];
        std::string tag = "merge input adapter " + std::to_string(i);
        require_input(item.is_object() && item.contains("adapter") &&
                          item.contains("weight"),
                      tag + ": requires adapter and weight");
        const json& ad = item.at("adapter");
        require_input(ad.is_object() && ad.contains("B") && ad.contains("A") &&
                          ad.contains("rank"),
                      tag + ": requires B, A and rank");
        WeightedAdapter wa;
        wa.adapter.B = matrix_from_json_value(ad.at("B"), tag + " B");
        wa.adapter.A = matrix_from_json_value(ad.at("A"), tag + " A");
        try {
            wa.adapter.rank = ad.at("rank").get<int>();
            wa.weight = item.at("weight").get<double>();
        } catch (const json::exception& e) {
            throw InputError(tag + ": " + e.what());
        }
        input.spec.items.push_back(std::move(wa));
    }
    return input;
}

std::string loss_curve_to_csv(const std::vector<LossRecord>& curve) {
    std::string out = "iteration,l_rec,l_con,l_tot\n";
    char buf[128];
    for (const LossRecord& rec : curve) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g\n",
                      rec.iteration, rec.l_rec, rec.l_con, rec.l_tot);
        out += buf;
    }
    return out;
}

}  // namespace inkline
