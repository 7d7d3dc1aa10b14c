#include "moocxfer/network.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "moocxfer/rng.hpp"

namespace moocxfer::nn {
namespace {

// C[n x m] += A[n x k] * B[k x m]
void matmul_acc(const double* A, const double* B, double* C, std::size_t n, std::size_t k,
                std::size_t m) {
    for (std::size_t r = 0; r < n; ++r) {
        const double* a = A + r * k;
        double* c = C + r * m;
        for (std::size_t p = 0; p < k; ++p) {
            const double av = a[p];
            if (av == 0.0) continue;
            const double* b = B + p * m;
            for (std::size_t j = 0; j < m; ++j) c[j] += av * b[j];
        }
    }
}

// C[n x m] += A[n x k] * B^T, with B stored [m x k]
void matmul_bt_acc(const double* A, const double* B, double* C, std::size_t n, std::size_t k,
                   std::size_t m) {
    for (std::size_t r = 0; r < n; ++r) {
        const double* a = A + r * k;
        double* c = C + r * m;
        for (std::size_t j = 0; j < m; ++j) {
            const double* b = B + j * k;
            double acc = 0.0;
            for (std::size_t p = 0; p < k; ++p) acc += a[p] * b[p];
            c[j] += acc;
        }
    }
}

// W[m x k] += A^T * X, with A [n x m], X [n x k]  (outer-product accumulation)
void outer_acc(const double* A, const double* X, double* W, std::size_t n, std::size_t m,
               std::size_t k) {
    for (std::size_t r = 0; r < n; ++r) {
        const double* a = A + r * m;
        const double* x = X + r * k;
        for (std::size_t j = 0; j < m; ++j) {
            const double av = a[j];
            if (av == 0.0) continue;
            double* w = W + j * k;
            for (std::size_t p = 0; p < k; ++p) w[p] += av * x[p];
        }
    }
}

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

struct LstmDims {
    std::size_t steps, batch, in, cells;
    std::size_t w_count() const { return 4 * cells * in; }
    std::size_t r_count() const { return 4 * cells * cells; }
    std::size_t b_count() const { return 4 * cells; }
    std::size_t dir_count() const { return w_count() + r_count() + b_count(); }
};

// One LSTM direction: dir=+1 scans forward in time, dir=-1 backward. The trace
// is indexed by the original time position either way.
void lstm_forward_dir(const double* X, const LstmDims& d, const double* params, int dir,
                      LstmTrace& trace) {
    const std::size_t T = d.steps, N = d.batch, I = d.in, H = d.cells;
    const double* W = params;
    const double* R = params + d.w_count();
    const double* B = R + d.r_count();

    trace.steps = T;
    trace.batch = N;
    trace.cells = H;
    trace.gates.assign(T * N * 4 * H, 0.0);
    trace.cell.assign(T * N * H, 0.0);
    trace.tanh_cell.assign(T * N * H, 0.0);
    trace.hidden.assign(T * N * H, 0.0);

    std::vector<double> xt(N * I), z(N * 4 * H);
    std::vector<double> h_prev(N * H, 0.0), c_prev(N * H, 0.0);

    for (std::size_t s = 0; s < T; ++s) {
        const std::size_t t = dir > 0 ? s : T - 1 - s;
        for (std::size_t n = 0; n < N; ++n) {
            const double* src = X + (n * T + t) * I;
            double* dst = xt.data() + n * I;
            for (std::size_t i = 0; i < I; ++i) dst[i] = src[i];
        }
        for (std::size_t n = 0; n < N; ++n) {
            double* zr = z.data() + n * 4 * H;
            for (std::size_t j = 0; j < 4 * H; ++j) zr[j] = B[j];
        }
        matmul_bt_acc(xt.data(), W, z.data(), N, I, 4 * H);
        matmul_bt_acc(h_prev.data(), R, z.data(), N, H, 4 * H);

        double* gates_t = trace.gates.data() + t * N * 4 * H;
        double* cell_t = trace.cell.data() + t * N * H;
        double* tc_t = trace.tanh_cell.data() + t * N * H;
        double* hid_t = trace.hidden.data() + t * N * H;
        for (std::size_t n = 0; n < N; ++n) {
            const double* zr = z.data() + n * 4 * H;
            double* g = gates_t + n * 4 * H;
            double* cp = c_prev.data() + n * H;
            double* hp = h_prev.data() + n * H;
            for (std::size_t j = 0; j < H; ++j) {
                const double gi = sigmoid(zr[j]);
                const double gf = sigmoid(zr[H + j]);
                const double gg = std::tanh(zr[2 * H + j]);
                const double go = sigmoid(zr[3 * H + j]);
                const double c = gf * cp[j] + gi * gg;
                const double tc = std::tanh(c);
                const double h = go * tc;
                g[j] = gi;
                g[H + j] = gf;
                g[2 * H + j] = gg;
                g[3 * H + j] = go;
                cell_t[n * H + j] = c;
                tc_t[n * H + j] = tc;
                hid_t[n * H + j] = h;
                cp[j] = c;
                hp[j] = h;
            }
        }
    }
}

// dH holds dLoss/dhidden per original position [T][N][H]. Accumulates dX and
// parameter gradients for this direction.
void lstm_backward_dir(const double* X, const LstmDims& d, const double* params, int dir,
                       const LstmTrace& trace, const std::vector<double>& dH, double* dX,
                       double* dparams) {
    const std::size_t T = d.steps, N = d.batch, I = d.in, H = d.cells;
    const double* W = params;
    const double* R = params + d.w_count();
    double* dW = dparams;
    double* dR = dparams + d.w_count();
    double* dB = dR + d.r_count();

    std::vector<double> dh_next(N * H, 0.0), dc_next(N * H, 0.0);
    std::vector<double> dz(N * 4 * H), xt(N * I), dxt(N * I), hprev(N * H);

    for (std::size_t s = T; s-- > 0;) {
        const std::size_t t = dir > 0 ? s : T - 1 - s;
        const bool first = (s == 0);
        const std::size_t tp = dir > 0 ? t - 1 : t + 1;  // valid only when !first

        const double* gates_t = trace.gates.data() + t * N * 4 * H;
        const double* cell_t = trace.cell.data() + t * N * H;
        const double* tc_t = trace.tanh_cell.data() + t * N * H;
        const double* cell_prev = first ? nullptr : trace.cell.data() + tp * N * H;
        const double* hid_prev = first ? nullptr : trace.hidden.data() + tp * N * H;

        for (std::size_t n = 0; n < N; ++n) {
            const double* g = gates_t + n * 4 * H;
            double* dzr = dz.data() + n * 4 * H;
            for (std::size_t j = 0; j < H; ++j) {
                const double gi = g[j], gf = g[H + j], gg = g[2 * H + j], go = g[3 * H + j];
                const double tc = tc_t[n * H + j];
                const double cprev = first ? 0.0 : cell_prev[n * H + j];
                const double dh = dH[(t * N + n) * H + j] + dh_next[n * H + j];
                const double dgo = dh * tc;
                const double dc = dh * go * (1.0 - tc * tc) + dc_next[n * H + j];
                const double dgf = dc * cprev;
                const double dgi = dc * gg;
                const double dgg = dc * gi;
                dzr[j] = dgi * gi * (1.0 - gi);
                dzr[H + j] = dgf * gf * (1.0 - gf);
                dzr[2 * H + j] = dgg * (1.0 - gg * gg);
                dzr[3 * H + j] = dgo * go * (1.0 - go);
                dc_next[n * H + j] = dc * gf;
            }
        }

        for (std::size_t n = 0; n < N; ++n) {
            const double* src = X + (n * T + t) * I;
            double* dst = xt.data() + n * I;
            for (std::size_t i = 0; i < I; ++i) dst[i] = src[i];
            double* hp = hprev.data() + n * H;
            for (std::size_t j = 0; j < H; ++j) hp[j] = first ? 0.0 : hid_prev[n * H + j];
        }

        outer_acc(dz.data(), xt.data(), dW, N, 4 * H, I);
        outer_acc(dz.data(), hprev.data(), dR, N, 4 * H, H);
        for (std::size_t n = 0; n < N; ++n) {
            const double* dzr = dz.data() + n * 4 * H;
            for (std::size_t j = 0; j < 4 * H; ++j) dB[j] += dzr[j];
        }

        std::fill(dxt.begin(), dxt.end(), 0.0);
        matmul_acc(dz.data(), W, dxt.data(), N, 4 * H, I);
        for (std::size_t n = 0; n < N; ++n) {
            double* dst = dX + (n * T + t) * I;
            const double* src = dxt.data() + n * I;
            for (std::size_t i = 0; i < I; ++i) dst[i] += src[i];
        }

        std::fill(dh_next.begin(), dh_next.end(), 0.0);
        matmul_acc(dz.data(), R, dh_next.data(), N, 4 * H, H);
    }
}

std::size_t conv_pad_left(int kernel) { return static_cast<std::size_t>((kernel - 1) / 2); }

[[noreturn]] void layer_error(std::size_t index, const LayerSpec& spec, const std::string& msg) {
    throw std::invalid_argument("layer " + std::to_string(index) + " (" +
                                layer_kind_name(spec.kind) + "): " + msg);
}

}  // namespace

std::string layer_kind_name(LayerKind kind) {
    switch (kind) {
        case LayerKind::Dense: return "dense";
        case LayerKind::Conv1D: return "conv1d";
        case LayerKind::Lstm: return "lstm";
        case LayerKind::BiLstm: return "bilstm";
        case LayerKind::Sigmoid: return "sigmoid";
        case LayerKind::ReLU: return "relu";
        case LayerKind::LeakyReLU: return "leaky_relu";
        case LayerKind::Flatten: return "flatten";
        case LayerKind::Reshape: return "reshape";
    }
    return "?";
}

LayerSpec LayerSpec::dense(int n) { return {LayerKind::Dense, n}; }
LayerSpec LayerSpec::conv1d(int channels, int kernel_size) {
    LayerSpec s{LayerKind::Conv1D, channels};
    s.kernel = kernel_size;
    return s;
}
LayerSpec LayerSpec::lstm(int cells) { return {LayerKind::Lstm, cells}; }
LayerSpec LayerSpec::bilstm(int cells) { return {LayerKind::BiLstm, cells}; }
LayerSpec LayerSpec::sigmoid() { return {LayerKind::Sigmoid}; }
LayerSpec LayerSpec::relu() { return {LayerKind::ReLU}; }
LayerSpec LayerSpec::leaky_relu(double alpha) {
    LayerSpec s{LayerKind::LeakyReLU};
    s.alpha = alpha;
    return s;
}
LayerSpec LayerSpec::flatten() { return {LayerKind::Flatten}; }
LayerSpec LayerSpec::reshape(Shape shape) {
    LayerSpec s{LayerKind::Reshape};
    s.target_shape = std::move(shape);
    return s;
}

Network Network::build(const std::vector<LayerSpec>& specs, const Shape& input_shape,
                       std::uint64_t seed) {
    if (specs.empty()) throw std::invalid_argument("network needs at least one layer");
    if (shape_product(input_shape) == 0) throw std::invalid_argument("empty input shape");

    Network net;
    net.input_shape_ = input_shape;
    Shape cur = input_shape;
    std::size_t offset = 0;

    for (std::size_t li = 0; li < specs.size(); ++li) {
        const LayerSpec& spec = specs[li];
        LayerLayout lay;
        lay.spec = spec;
        lay.in_shape = cur;
        lay.param_offset = offset;

        switch (spec.kind) {
            case LayerKind::Dense: {
                if (spec.units < 1) layer_error(li, spec, "units must be >= 1");
                if (cur.empty()) layer_error(li, spec, "needs at least rank-1 input");
                const std::size_t in = cur.back();
                const std::size_t out = static_cast<std::size_t>(spec.units);
                lay.param_count = out * in + out;
                lay.out_shape = cur;
                lay.out_shape.back() = out;
                break;
            }
            case LayerKind::Conv1D: {
                if (spec.units < 1 || spec.kernel < 1)
                    layer_error(li, spec, "channels and kernel_size must be >= 1");
                if (cur.size() != 2)
                    layer_error(li, spec, "expects [time, channels] input, got " +
                                               shape_to_string(cur));
                const std::size_t ic = cur[1];
                const std::size_t oc = static_cast<std::size_t>(spec.units);
                const std::size_t k = static_cast<std::size_t>(spec.kernel);
                lay.param_count = oc * k * ic + oc;
                lay.out_shape = {cur[0], oc};
                break;
            }
            case LayerKind::Lstm:
            case LayerKind::BiLstm: {
                if (spec.units < 1) layer_error(li, spec, "cells must be >= 1");
                if (cur.size() != 2)
                    layer_error(li, spec, "expects [time, channels] input, got " +
                                               shape_to_string(cur));
                const std::size_t in = cur[1];
                const std::size_t h = static_cast<std::size_t>(spec.units);
                const std::size_t dir = 4 * h * in + 4 * h * h + 4 * h;
                const bool bi = spec.kind == LayerKind::BiLstm;
                lay.param_count = bi ? 2 * dir : dir;
                lay.out_shape = {cur[0], bi ? 2 * h : h};
                break;
            }
            case LayerKind::Sigmoid:
            case LayerKind::ReLU:
                lay.out_shape = cur;
                break;
            case LayerKind::LeakyReLU:
                if (!(spec.alpha > 0.0 && spec.alpha < 1.0))
                    layer_error(li, spec, "alpha must be in (0, 1)");
                lay.out_shape = cur;
                break;
            case LayerKind::Flatten:
                lay.out_shape = {shape_product(cur)};
                break;
            case LayerKind::Reshape:
                if (shape_product(spec.target_shape) != shape_product(cur))
                    layer_error(li, spec, "cannot reshape " + shape_to_string(cur) + " to " +
                                              shape_to_string(spec.target_shape));
                lay.out_shape = spec.target_shape;
                break;
        }

        offset += lay.param_count;
        cur = lay.out_shape;
        net.layers_.push_back(std::move(lay));
    }

    net.params_.assign(offset, 0.0);
    Rng rng(seed);
    auto glorot = [&rng](double* w, std::size_t count, std::size_t fan_in, std::size_t fan_out) {
        const double s = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        for (std::size_t i = 0; i < count; ++i) w[i] = uniform(rng, -s, s);
    };

    for (const LayerLayout& lay : net.layers_) {
        double* p = net.params_.data() + lay.param_offset;
        switch (lay.spec.kind) {
            case LayerKind::Dense: {
                const std::size_t in = lay.in_shape.back();
                const std::size_t out = lay.out_shape.back();
                glorot(p, out * in, in, out);
                break;  // bias stays zero
            }
            case LayerKind::Conv1D: {
                const std::size_t ic = lay.in_shape[1], oc = lay.out_shape[1];
                const std::size_t k = static_cast<std::size_t>(lay.spec.kernel);
                glorot(p, oc * k * ic, k * ic, k * oc);
                break;
            }
            case LayerKind::Lstm:
            case LayerKind::BiLstm: {
                const std::size_t in = lay.in_shape[1];
                const std::size_t h = static_cast<std::size_t>(lay.spec.units);
                const std::size_t dirs = lay.spec.kind == LayerKind::BiLstm ? 2 : 1;
                for (std::size_t dir = 0; dir < dirs; ++dir) {
                    double* q = p + dir * (4 * h * in + 4 * h * h + 4 * h);
                    glorot(q, 4 * h * in, in, 4 * h);
                    glorot(q + 4 * h * in, 4 * h * h, h, 4 * h);
                    double* bias = q + 4 * h * in + 4 * h * h;
                    for (std::size_t j = 0; j < h; ++j) bias[h + j] = 1.0;  // forget gate
                }
                break;
            }
            default: break;
        }
    }
    return net;
}

Tape run_forward(const Network& net, const Tensor& input) {
    if (input.shape.size() != net.input_shape_.size() + 1 ||
        input.sample_shape() != net.input_shape_) {
        throw std::invalid_argument("forward: input shape " + shape_to_string(input.shape) +
                                    " does not match [batch]+" +
                                    shape_to_string(net.input_shape_));
    }
    if (!input.all_finite()) throw std::invalid_argument("forward: non-finite input");

    const std::size_t N = input.batch();
    Tape tape;
    tape.input = input;
    tape.outputs.reserve(net.layers_.size());
    tape.lstm.resize(net.layers_.size());

    const Tensor* x = &tape.input;
    for (std::size_t li = 0; li < net.layers_.size(); ++li) {
        const LayerLayout& lay = net.layers_[li];
        const double* p = net.params_.data() + lay.param_offset;
        Shape out_shape = lay.out_shape;
        out_shape.insert(out_shape.begin(), N);
        Tensor y(std::move(out_shape));

        switch (lay.spec.kind) {
            case LayerKind::Dense: {
                const std::size_t in = lay.in_shape.back();
                const std::size_t out = lay.out_shape.back();
                const std::size_t rows = x->size() / in;
                const double* b = p + out * in;
                for (std::size_t r = 0; r < rows; ++r) {
                    double* yr = y.values.data() + r * out;
                    for (std::size_t o = 0; o < out; ++o) yr[o] = b[o];
                }
                matmul_bt_acc(x->values.data(), p, y.values.data(), rows, in, out);
                break;
            }
            case LayerKind::Conv1D: {
                const std::size_t T = lay.in_shape[0], ic = lay.in_shape[1];
                const std::size_t oc = lay.out_shape[1];
                const std::size_t k = static_cast<std::size_t>(lay.spec.kernel);
                const double* b = p + oc * k * ic;
                if (k == 1) {
                    const std::size_t rows = N * T;
                    for (std::size_t r = 0; r < rows; ++r) {
                        double* yr = y.values.data() + r * oc;
                        for (std::size_t o = 0; o < oc; ++o) yr[o] = b[o];
                    }
                    matmul_bt_acc(x->values.data(), p, y.values.data(), rows, ic, oc);
                } else {
                    const std::size_t pad = conv_pad_left(lay.spec.kernel);
                    for (std::size_t n = 0; n < N; ++n) {
                        const double* xs = x->values.data() + n * T * ic;
                        double* ys = y.values.data() + n * T * oc;
                        for (std::size_t t = 0; t < T; ++t) {
                            double* yr = ys + t * oc;
                            for (std::size_t o = 0; o < oc; ++o) {
                                double acc = b[o];
                                const double* w = p + o * k * ic;
                                for (std::size_t dt = 0; dt < k; ++dt) {
                                    const std::ptrdiff_t tt =
                                        static_cast<std::ptrdiff_t>(t + dt) -
                                        static_cast<std::ptrdiff_t>(pad);
                                    if (tt < 0 || tt >= static_cast<std::ptrdiff_t>(T)) continue;
                                    const double* xr = xs + tt * ic;
                                    const double* wr = w + dt * ic;
                                    for (std::size_t i = 0; i < ic; ++i) acc += wr[i] * xr[i];
                                }
                                yr[o] = acc;
                            }
                        }
                    }
                }
                break;
            }
            case LayerKind::Lstm:
            case LayerKind::BiLstm: {
                const LstmDims d{lay.in_shape[0], N, lay.in_shape[1],
                                 static_cast<std::size_t>(lay.spec.units)};
                const bool bi = lay.spec.kind == LayerKind::BiLstm;
                tape.lstm[li].resize(bi ? 2 : 1);
                lstm_forward_dir(x->values.data(), d, p, +1, tape.lstm[li][0]);
                if (bi) lstm_forward_dir(x->values.data(), d, p + d.dir_count(), -1, tape.lstm[li][1]);
                const std::size_t T = d.steps, H = d.cells;
                const std::size_t oc = bi ? 2 * H : H;
                for (std::size_t n = 0; n < N; ++n) {
                    for (std::size_t t = 0; t < T; ++t) {
                        double* yr = y.values.data() + (n * T + t) * oc;
                        const double* hf = tape.lstm[li][0].hidden.data() + (t * N + n) * H;
                        for (std::size_t j = 0; j < H; ++j) yr[j] = hf[j];
                        if (bi) {
                            const double* hb = tape.lstm[li][1].hidden.data() + (t * N + n) * H;
                            for (std::size_t j = 0; j < H; ++j) yr[H + j] = hb[j];
                        }
                    }
                }
                break;
            }
            case LayerKind::Sigmoid:
                for (std::size_t i = 0; i < x->size(); ++i) y.values[i] = sigmoid(x->values[i]);
                break;
            case LayerKind::ReLU:
                for (std::size_t i = 0; i < x->size(); ++i)
                    y.values[i] = x->values[i] > 0.0 ? x->values[i] : 0.0;
                break;
            case LayerKind::LeakyReLU:
                for (std::size_t i = 0; i < x->size(); ++i)
                    y.values[i] = x->values[i] > 0.0 ? x->values[i] : lay.spec.alpha * x->values[i];
                break;
            case LayerKind::Flatten:
            case LayerKind::Reshape:
                y.values = x->values;
                break;
        }
        tape.outputs.push_back(std::move(y));
        x = &tape.outputs.back();
    }
    return tape;
}

BackwardResult run_backward(const Network& net, const Tape& tape, const Tensor& output_grad) {
    if (tape.outputs.size() != net.layers_.size())
        throw std::logic_error("backward: tape does not match network");
    if (!same_shape(output_grad, tape.outputs.back()))
        throw std::invalid_argument("backward: gradient shape " +
                                    shape_to_string(output_grad.shape) + " does not match output " +
                                    shape_to_string(tape.outputs.back().shape));

    const std::size_t N = tape.input.batch();
    BackwardResult res;
    res.param_grads.assign(net.params_.size(), 0.0);

    Tensor grad = output_grad;
    for (std::size_t li = net.layers_.size(); li-- > 0;) {
        const LayerLayout& lay = net.layers_[li];
        const Tensor& x = li == 0 ? tape.input : tape.outputs[li - 1];
        const Tensor& y = tape.outputs[li];
        const double* p = net.params_.data() + lay.param_offset;
        double* dp = res.param_grads.data() + lay.param_offset;
        Tensor dx(x.shape);

        switch (lay.spec.kind) {
            case LayerKind::Dense: {
                const std::size_t in = lay.in_shape.back();
                const std::size_t out = lay.out_shape.back();
                const std::size_t rows = x.size() / in;
                outer_acc(grad.values.data(), x.values.data(), dp, rows, out, in);
                double* db = dp + out * in;
                for (std::size_t r = 0; r < rows; ++r) {
                    const double* gr = grad.values.data() + r * out;
                    for (std::size_t o = 0; o < out; ++o) db[o] += gr[o];
                }
                matmul_acc(grad.values.data(), p, dx.values.data(), rows, out, in);
                break;
            }
            case LayerKind::Conv1D: {
                const std::size_t T = lay.in_shape[0], ic = lay.in_shape[1];
                const std::size_t oc = lay.out_shape[1];
                const std::size_t k = static_cast<std::size_t>(lay.spec.kernel);
                double* db = dp + oc * k * ic;
                if (k == 1) {
                    const std::size_t rows = N * T;
                    outer_acc(grad.values.data(), x.values.data(), dp, rows, oc, ic);
                    for (std::size_t r = 0; r < rows; ++r) {
                        const double* gr = grad.values.data() + r * oc;
                        for (std::size_t o = 0; o < oc; ++o) db[o] += gr[o];
                    }
                    matmul_acc(grad.values.data(), p, dx.values.data(), rows, oc, ic);
                } else {
                    const std::size_t pad = conv_pad_left(lay.spec.kernel);
                    for (std::size_t n = 0; n < N; ++n) {
                        const double* xs = x.values.data() + n * T * ic;
                        const double* gs = grad.values.data() + n * T * oc;
                        double* dxs = dx.values.data() + n * T * ic;
                        for (std::size_t t = 0; t < T; ++t) {
                            const double* gr = gs + t * oc;
                            for (std::size_t o = 0; o < oc; ++o) {
                                const double gv = gr[o];
                                if (gv == 0.0) continue;
                                db[o] += gv;
                                const double* w = p + o * k * ic;
                                double* dw = dp + o * k * ic;
                                for (std::size_t dt = 0; dt < k; ++dt) {
                                    const std::ptrdiff_t tt =
                                        static_cast<std::ptrdiff_t>(t + dt) -
                                        static_cast<std::ptrdiff_t>(pad);
                                    if (tt < 0 || tt >= static_cast<std::ptrdiff_t>(T)) continue;
                                    const double* xr = xs + tt * ic;
                                    double* dxr = dxs + tt * ic;
                                    const double* wr = w + dt * ic;
                                    double* dwr = dw + dt * ic;
                                    for (std::size_t i = 0; i < ic; ++i) {
                                        dwr[i] += gv * xr[i];
                                        dxr[i] += gv * wr[i];
                                    }
                                }
                            }
                        }
                    }
                }
                break;
            }
            case LayerKind::Lstm:
            case LayerKind::BiLstm: {
                const LstmDims d{lay.in_shape[0], N, lay.in_shape[1],
                                 static_cast<std::size_t>(lay.spec.units)};
                const bool bi = lay.spec.kind == LayerKind::BiLstm;
                const std::size_t T = d.steps, H = d.cells;
                const std::size_t oc = bi ? 2 * H : H;
                // split the channel-concatenated gradient into per-direction
                // [T][N][H] layouts matching the traces
                std::vector<double> dh_f(T * N * H), dh_b;
                if (bi) dh_b.assign(T * N * H, 0.0);
                for (std::size_t n = 0; n < N; ++n) {
                    for (std::size_t t = 0; t < T; ++t) {
                        const double* gr = grad.values.data() + (n * T + t) * oc;
                        double* df = dh_f.data() + (t * N + n) * H;
                        for (std::size_t j = 0; j < H; ++j) df[j] = gr[j];
                        if (bi) {
                            double* dbk = dh_b.data() + (t * N + n) * H;
                            for (std::size_t j = 0; j < H; ++j) dbk[j] = gr[H + j];
                        }
                    }
                }
                lstm_backward_dir(x.values.data(), d, p, +1, tape.lstm[li][0], dh_f,
                                  dx.values.data(), dp);
                if (bi)
                    lstm_backward_dir(x.values.data(), d, p + d.dir_count(), -1, tape.lstm[li][1],
                                      dh_b, dx.values.data(), dp + d.dir_count());
                break;
            }
            case LayerKind::Sigmoid:
                for (std::size_t i = 0; i < y.size(); ++i)
                    dx.values[i] = grad.values[i] * y.values[i] * (1.0 - y.values[i]);
                break;
            case LayerKind::ReLU:
                for (std::size_t i = 0; i < x.size(); ++i)
                    dx.values[i] = x.values[i] > 0.0 ? grad.values[i] : 0.0;
                break;
            case LayerKind::LeakyReLU:
                for (std::size_t i = 0; i < x.size(); ++i)
                    dx.values[i] = x.values[i] > 0.0 ? grad.values[i]
                                                     : lay.spec.alpha * grad.values[i];
                break;
            case LayerKind::Flatten:
            case LayerKind::Reshape:
                dx.values = grad.values;
                break;
        }
        grad = std::move(dx);
    }
    res.input_grad = std::move(grad);
    return res;
}

Tensor Network::forward(const Tensor& input) {
    tape_ = run_forward(*this, input);
    return tape_->output();
}

std::vector<double> Network::backward(const Tensor& output_grad) {
    if (!tape_) throw std::logic_error("backward called without a recorded forward pass");
    return run_backward(*this, *tape_, output_grad).param_grads;
}

void Network::dump_params_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "index,value\n";
    out.precision(17);
    for (std::size_t i = 0; i < params_.size(); ++i) out << i << "," << params_[i] << "\n";
}

}  // namespace moocxfer::nn
