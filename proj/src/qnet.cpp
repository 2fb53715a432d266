#include "rantl/qnet.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

namespace rantl {
namespace {

using detail::DenseLayout;
using detail::Layout;

Layout make_layout(const QNetTopology& t) {
  if (t.input_dim < 1 || t.output_dim < 1) throw ContractViolation("QNet dimensions must be >= 1");
  for (int w : t.hidden)
    if (w < 1) throw ContractViolation("QNet hidden widths must be >= 1");
  if (t.cell == CellKind::lstm && t.hidden.empty())
    throw ContractViolation("LSTM QNet needs at least one hidden width");

  Layout l;
  std::size_t off = 0;
  int prev = t.input_dim;
  std::size_t first_dense = 0;
  if (t.cell == CellKind::lstm) {
    const int h = t.hidden[0];
    l.has_lstm = true;
    l.lstm = {prev, h, off, off + std::size_t(4 * h) * prev, 0};
    off += std::size_t(4 * h) * prev + std::size_t(4 * h) * h;
    l.lstm.b = off;
    if (t.bias) off += 4 * h;
    prev = h;
    first_dense = 1;
  }
  auto add = [&](int out) {
    DenseLayout d{prev, out, off, 0};
    off += std::size_t(out) * prev;
    d.b = off;
    if (t.bias) off += out;
    l.dense.push_back(d);
    prev = out;
  };
  for (std::size_t i = first_dense; i < t.hidden.size(); ++i) add(t.hidden[i]);
  add(t.output_dim);
  l.total = off;
  return l;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::size_t QNetTopology::parameter_count() const { return make_layout(*this).total; }

struct QNet::Cache {
  // LSTM, per step: activated gates (4H), cell (H), hidden (H), tanh(cell) (H)
  std::vector<double> gates, cell, hidden, cell_tanh;
  // dense hidden layers: activations after tanh; acts[0] is the chain input
  std::vector<std::vector<double>> acts;
};

QNet::QNet(QNetTopology topology, std::uint64_t seed, AdamParams adam)
    : topo_(std::move(topology)), layout_(make_layout(topo_)), adam_(adam) {
  const Layout& l = layout_;
  params_.assign(l.total, 0.0);
  std::mt19937_64 rng(seed);
  auto fill = [&](std::size_t off, std::size_t n, int fan_in, int fan_out) {
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> u(-limit, limit);
    for (std::size_t i = 0; i < n; ++i) params_[off + i] = u(rng);
  };
  if (l.has_lstm) {
    const auto& s = l.lstm;
    fill(s.wx, std::size_t(4 * s.width) * s.in, s.in, s.width);
    fill(s.wh, std::size_t(4 * s.width) * s.width, s.width, s.width);
  }
  for (const auto& d : l.dense) fill(d.w, std::size_t(d.out) * d.in, d.in, d.out);
  adam_m_.assign(l.total, 0.0);
  adam_v_.assign(l.total, 0.0);
  reset_state();
}

QNet QNet::zeros(QNetTopology topology, AdamParams adam) {
  QNet net(std::move(topology), 0, adam);
  std::fill(net.params_.begin(), net.params_.end(), 0.0);
  return net;
}

void QNet::reset_state() {
  const int h = topo_.cell == CellKind::lstm ? topo_.hidden[0] : 0;
  h_.assign(h, 0.0);
  c_.assign(h, 0.0);
}

void QNet::check_input(std::span<const double> inputs, int steps) const {
  if (steps < 1) throw ContractViolation("QNet input needs at least one step");
  if (topo_.cell == CellKind::dense && steps != 1)
    throw ContractViolation("dense QNet takes exactly one input step");
  if (inputs.size() != std::size_t(steps) * topo_.input_dim)
    throw ContractViolation("QNet input dimension mismatch: expected " +
                            std::to_string(std::size_t(steps) * topo_.input_dim) + ", got " +
                            std::to_string(inputs.size()));
  for (double v : inputs)
    if (!std::isfinite(v)) throw ContractViolation("QNet input is not finite");
}

// Runs the net up to (and excluding) the output layer; records activations
// in `cache`. h0/c0 seed the LSTM (nullptr = zero state). Returns the input
// vector of the output layer as the last element of cache.acts.
namespace {
void hidden_forward(const Layout& l, const std::vector<double>& p, bool bias,
                    std::span<const double> inputs, int steps, const double* h0, const double* c0,
                    std::vector<double>& gates, std::vector<double>& cell,
                    std::vector<double>& hidden, std::vector<double>& cell_tanh,
                    std::vector<std::vector<double>>& acts) {
  const std::size_t n_hidden = l.dense.size() - 1;
  acts.resize(n_hidden + 1);
  if (l.has_lstm) {
    const auto& s = l.lstm;
    const int H = s.width;
    gates.assign(std::size_t(steps) * 4 * H, 0.0);
    cell.assign(std::size_t(steps) * H, 0.0);
    hidden.assign(std::size_t(steps) * H, 0.0);
    cell_tanh.assign(std::size_t(steps) * H, 0.0);
    for (int t = 0; t < steps; ++t) {
      const double* x = inputs.data() + std::size_t(t) * s.in;
      const double* hp = t > 0 ? &hidden[std::size_t(t - 1) * H] : h0;
      const double* cp = t > 0 ? &cell[std::size_t(t - 1) * H] : c0;
      double* g = &gates[std::size_t(t) * 4 * H];
      for (int r = 0; r < 4 * H; ++r) {
        double z = bias ? p[s.b + r] : 0.0;
        const double* wx = &p[s.wx + std::size_t(r) * s.in];
        for (int i = 0; i < s.in; ++i) z += wx[i] * x[i];
        if (hp) {
          const double* wh = &p[s.wh + std::size_t(r) * H];
          for (int i = 0; i < H; ++i) z += wh[i] * hp[i];
        }
        g[r] = (r >= 2 * H && r < 3 * H) ? std::tanh(z) : sigmoid(z);
      }
      for (int k = 0; k < H; ++k) {
        const double ig = g[k], fg = g[H + k], gg = g[2 * H + k], og = g[3 * H + k];
        const double c = fg * (cp ? cp[k] : 0.0) + ig * gg;
        const double tc = std::tanh(c);
        cell[std::size_t(t) * H + k] = c;
        cell_tanh[std::size_t(t) * H + k] = tc;
        hidden[std::size_t(t) * H + k] = og * tc;
      }
    }
    acts[0].assign(hidden.end() - H, hidden.end());
  } else {
    acts[0].assign(inputs.begin(), inputs.end());
  }
  for (std::size_t li = 0; li < n_hidden; ++li) {
    const auto& d = l.dense[li];
    const auto& in = acts[li];
    auto& out = acts[li + 1];
    out.resize(d.out);
    for (int o = 0; o < d.out; ++o) {
      double z = bias ? p[d.b + o] : 0.0;
      const double* w = &p[d.w + std::size_t(o) * d.in];
      for (int i = 0; i < d.in; ++i) z += w[i] * in[i];
      out[o] = std::tanh(z);
    }
  }
}

double output_row(const DenseLayout& d, const std::vector<double>& p, bool bias,
                  const std::vector<double>& in, int row) {
  double z = bias ? p[d.b + row] : 0.0;
  const double* w = &p[d.w + std::size_t(row) * d.in];
  for (int i = 0; i < d.in; ++i) z += w[i] * in[i];
  return z;
}
}  // namespace

double QNet::run(std::span<const double> inputs, int steps, int action, Cache* cache) const {
  const Layout& l = layout_;
  Cache local;
  Cache& c = cache ? *cache : local;
  hidden_forward(l, params_, topo_.bias, inputs, steps, nullptr, nullptr, c.gates, c.cell,
                 c.hidden, c.cell_tanh, c.acts);
  return output_row(l.dense.back(), params_, topo_.bias, c.acts.back(), action);
}

std::vector<double> QNet::forward(std::span<const double> input) {
  check_input(input, 1);
  const Layout& l = layout_;
  Cache c;
  const bool rec = l.has_lstm;
  hidden_forward(l, params_, topo_.bias, input, 1, rec ? h_.data() : nullptr,
                 rec ? c_.data() : nullptr, c.gates, c.cell, c.hidden, c.cell_tanh, c.acts);
  if (rec) {
    h_ = c.hidden;
    c_ = c.cell;
  }
  std::vector<double> q(topo_.output_dim);
  for (int a = 0; a < topo_.output_dim; ++a)
    q[a] = output_row(l.dense.back(), params_, topo_.bias, c.acts.back(), a);
  return q;
}

std::vector<double> QNet::evaluate(std::span<const double> inputs, int steps) const {
  check_input(inputs, steps);
  const Layout& l = layout_;
  Cache c;
  hidden_forward(l, params_, topo_.bias, inputs, steps, nullptr, nullptr, c.gates, c.cell,
                 c.hidden, c.cell_tanh, c.acts);
  std::vector<double> q(topo_.output_dim);
  for (int a = 0; a < topo_.output_dim; ++a)
    q[a] = output_row(l.dense.back(), params_, topo_.bias, c.acts.back(), a);
  return q;
}

double QNet::loss(std::span<const TdSample> batch) const {
  if (batch.empty()) throw ContractViolation("empty training batch");
  Cache c;
  double total = 0.0;
  for (const auto& s : batch) {
    check_input(s.inputs, s.steps);
    if (s.action < 0 || s.action >= topo_.output_dim)
      throw ContractViolation("training action index out of range");
    const double err = run(s.inputs, s.steps, s.action, &c) - s.target;
    total += err * err;
  }
  return total / batch.size();
}

void QNet::backprop(const Cache& c, std::span<const double> inputs, int steps, int action,
                    double dq, std::vector<double>& grad) const {
  const Layout& l = layout_;
  const bool bias = topo_.bias;
  const std::size_t n_hidden = l.dense.size() - 1;

  // output layer: only row `action` carries gradient
  const auto& out = l.dense.back();
  std::vector<double> delta(out.in, 0.0);
  {
    const auto& in = c.acts.back();
    const double* w = &params_[out.w + std::size_t(action) * out.in];
    double* gw = &grad[out.w + std::size_t(action) * out.in];
    for (int i = 0; i < out.in; ++i) {
      gw[i] += dq * in[i];
      delta[i] = dq * w[i];
    }
    if (bias) grad[out.b + action] += dq;
  }

  for (std::size_t li = n_hidden; li-- > 0;) {
    const auto& d = l.dense[li];
    const auto& a_out = c.acts[li + 1];
    const auto& a_in = c.acts[li];
    std::vector<double> dz(d.out);
    for (int o = 0; o < d.out; ++o) dz[o] = delta[o] * (1.0 - a_out[o] * a_out[o]);
    std::vector<double> next(d.in, 0.0);
    for (int o = 0; o < d.out; ++o) {
      const double* w = &params_[d.w + std::size_t(o) * d.in];
      double* gw = &grad[d.w + std::size_t(o) * d.in];
      for (int i = 0; i < d.in; ++i) {
        gw[i] += dz[o] * a_in[i];
        next[i] += w[i] * dz[o];
      }
      if (bias) grad[d.b + o] += dz[o];
    }
    delta = std::move(next);
  }

  if (!l.has_lstm) return;
  const auto& s = l.lstm;
  const int H = s.width;
  std::vector<double> dh = delta;  // gradient w.r.t. h_T
  std::vector<double> dc_next(H, 0.0);
  std::vector<double> dz(4 * H);
  for (int t = steps - 1; t >= 0; --t) {
    const double* g = &c.gates[std::size_t(t) * 4 * H];
    const double* tc = &c.cell_tanh[std::size_t(t) * H];
    const double* cprev = t > 0 ? &c.cell[std::size_t(t - 1) * H] : nullptr;
    const double* hprev = t > 0 ? &c.hidden[std::size_t(t - 1) * H] : nullptr;
    const double* x = inputs.data() + std::size_t(t) * s.in;
    for (int k = 0; k < H; ++k) {
      const double ig = g[k], fg = g[H + k], gg = g[2 * H + k], og = g[3 * H + k];
      const double dc = dc_next[k] + dh[k] * og * (1.0 - tc[k] * tc[k]);
      dz[k] = dc * gg * ig * (1.0 - ig);
      dz[H + k] = dc * (cprev ? cprev[k] : 0.0) * fg * (1.0 - fg);
      dz[2 * H + k] = dc * ig * (1.0 - gg * gg);
      dz[3 * H + k] = dh[k] * tc[k] * og * (1.0 - og);
      dc_next[k] = dc * fg;
    }
    std::fill(dh.begin(), dh.end(), 0.0);
    for (int r = 0; r < 4 * H; ++r) {
      double* gwx = &grad[s.wx + std::size_t(r) * s.in];
      for (int i = 0; i < s.in; ++i) gwx[i] += dz[r] * x[i];
      if (hprev) {
        const double* wh = &params_[s.wh + std::size_t(r) * H];
        double* gwh = &grad[s.wh + std::size_t(r) * H];
        for (int i = 0; i < H; ++i) {
          gwh[i] += dz[r] * hprev[i];
          dh[i] += wh[i] * dz[r];
        }
      }
      if (bias) grad[s.b + r] += dz[r];
    }
  }
}

std::vector<double> QNet::gradient(std::span<const TdSample> batch) const {
  if (batch.empty()) throw ContractViolation("empty training batch");
  std::vector<double> grad(params_.size(), 0.0);
  Cache c;
  const double scale = 2.0 / batch.size();
  for (const auto& s : batch) {
    check_input(s.inputs, s.steps);
    if (s.action < 0 || s.action >= topo_.output_dim)
      throw ContractViolation("training action index out of range");
    const double q = run(s.inputs, s.steps, s.action, &c);
    backprop(c, s.inputs, s.steps, s.action, scale * (q - s.target), grad);
  }
  return grad;
}

double QNet::train_step(std::span<const TdSample> batch) {
  if (batch.empty()) throw ContractViolation("empty training batch");
  for (std::size_t i = 0; i < batch.size(); ++i)
    if (!std::isfinite(batch[i].target))
      throw std::invalid_argument("non-finite TD target at batch element " + std::to_string(i));

  const double pre_loss = loss(batch);
  const std::vector<double> grad = gradient(batch);

  const auto saved_p = params_;
  const auto saved_m = adam_m_;
  const auto saved_v = adam_v_;
  ++adam_t_;
  const double b1t = 1.0 - std::pow(adam_.beta1, double(adam_t_));
  const double b2t = 1.0 - std::pow(adam_.beta2, double(adam_t_));
  bool finite = true;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    adam_m_[i] = adam_.beta1 * adam_m_[i] + (1.0 - adam_.beta1) * grad[i];
    adam_v_[i] = adam_.beta2 * adam_v_[i] + (1.0 - adam_.beta2) * grad[i] * grad[i];
    const double mhat = adam_m_[i] / b1t;
    const double vhat = adam_v_[i] / b2t;
    params_[i] -= adam_.learning_rate * mhat / (std::sqrt(vhat) + adam_.epsilon);
    finite = finite && std::isfinite(params_[i]);
  }
  if (!finite) {
    params_ = saved_p;
    adam_m_ = saved_m;
    adam_v_ = saved_v;
    --adam_t_;
    throw std::runtime_error("QNet update produced a non-finite parameter; step rejected");
  }
  return pre_loss;
}

void QNet::sync_from(const QNet& source) {
  if (!(source.topo_ == topo_)) throw ContractViolation("QNet sync between different topologies");
  params_ = source.params_;
}

void QNet::save(std::ostream& out) const {
  out << "qnet v1\n";
  out << "cell " << (topo_.cell == CellKind::dense ? "dense" : "lstm") << '\n';
  out << "input " << topo_.input_dim << '\n';
  out << "hidden";
  for (int w : topo_.hidden) out << ' ' << w;
  out << '\n';
  out << "output " << topo_.output_dim << '\n';
  out << "bias " << (topo_.bias ? 1 : 0) << '\n';
  out << "params " << params_.size() << '\n';
  for (double v : params_) out << format_double(v) << '\n';
}

QNet QNet::load(std::istream& in) {
  auto fail = [](const std::string& what) -> QNet {
    throw std::runtime_error("malformed QNet file: " + what);
  };
  std::string line, word;
  if (!std::getline(in, line) || line != "qnet v1") return fail("bad magic");
  QNetTopology t;
  auto field = [&](const char* key) {
    if (!std::getline(in, line)) fail(std::string("missing ") + key);
    std::istringstream ls(line);
    ls >> word;
    if (word != key) fail(std::string("expected ") + key);
    return std::string(line.substr(word.size()));
  };
  {
    std::istringstream ls(field("cell"));
    ls >> word;
    if (word == "dense") t.cell = CellKind::dense;
    else if (word == "lstm") t.cell = CellKind::lstm;
    else return fail("unknown cell kind");
  }
  t.input_dim = std::stoi(field("input"));
  {
    std::istringstream ls(field("hidden"));
    t.hidden.clear();
    int w;
    while (ls >> w) t.hidden.push_back(w);
  }
  t.output_dim = std::stoi(field("output"));
  t.bias = std::stoi(field("bias")) != 0;
  const std::size_t n = std::stoull(field("params"));
  QNet net = QNet::zeros(t);
  if (n != net.params_.size()) return fail("parameter count does not match topology");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::getline(in, line)) return fail("truncated parameter list");
    double v;
    auto res = std::from_chars(line.data(), line.data() + line.size(), v);
    if (res.ec != std::errc{}) return fail("bad parameter value");
    net.params_[i] = v;
  }
  return net;
}

double grad_check(QNet& net, const TdSample& sample, double h, double floor) {
  const std::span<const TdSample> batch(&sample, 1);
  const std::vector<double> analytic = net.gradient(batch);
  auto p = net.parameters();
  double worst = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double keep = p[i];
    p[i] = keep + h;
    const double up = net.loss(batch);
    p[i] = keep - h;
    const double down = net.loss(batch);
    p[i] = keep;
    const double numeric = (up - down) / (2.0 * h);
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), floor});
    worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
  }
  return worst;
}

}  // namespace rantl
