#pragma once

// Straight-line reference implementations of the forward passes. They share
// nothing with the library except the parameter store, read by name, and use
// plain nested vectors and loops.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "rgn/hrgn.hpp"
#include "rgn/srgn.hpp"

namespace oracle {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;

inline Mat load(const rgn::ParameterStore& p, const std::string& name) {
  const auto& t = p.get(name);
  Mat m(t.rows(), Vec(t.cols()));
  for (std::size_t i = 0; i < t.rows(); ++i)
    for (std::size_t j = 0; j < t.cols(); ++j) m[i][j] = t.at(i, j);
  return m;
}

inline double relu(double x) { return x > 0 ? x : 0; }

// x (1 x r) times W (r x c).
inline Vec times(const Vec& x, const Mat& w) {
  Vec out(w[0].size(), 0.0);
  for (std::size_t j = 0; j < out.size(); ++j)
    for (std::size_t i = 0; i < x.size(); ++i) out[j] += x[i] * w[i][j];
  return out;
}

inline Vec relu_times(const Vec& x, const Mat& w) {
  Vec out = times(x, w);
  for (auto& v : out) v = relu(v);
  return out;
}

inline Vec join(const Vec& a, const Vec& b) {
  Vec out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

// Column-wise pool over a set of rows.
inline Vec pool_rows(rgn::PoolKind kind, const std::vector<Vec>& rows) {
  Vec out(rows[0].size());
  for (std::size_t j = 0; j < out.size(); ++j) {
    double acc = kind == rgn::PoolKind::max ? rows[0][j] : 0.0;
    for (const auto& r : rows) acc = kind == rgn::PoolKind::max ? std::max(acc, r[j]) : acc + r[j];
    out[j] = kind == rgn::PoolKind::max ? acc : acc / double(rows.size());
  }
  return out;
}

// Affine head with relu between hidden layers; parameter pairs w<i>, b<i>.
inline double head(const rgn::ParameterStore& p, const std::string& prefix, Vec z) {
  std::size_t i = 0;
  while (p.contains(prefix + "w" + std::to_string(i))) {
    const Mat w = load(p, prefix + "w" + std::to_string(i));
    const Mat b = load(p, prefix + "b" + std::to_string(i));
    Vec next = times(z, w);
    for (std::size_t j = 0; j < next.size(); ++j) next[j] += b[0][j];
    ++i;
    if (p.contains(prefix + "w" + std::to_string(i)))
      for (auto& v : next) v = relu(v);
    z = next;
  }
  return z[0];
}

// ---------------------------------------------------------------------------
// Star graph.

struct StarTrace {
  std::vector<std::vector<Vec>> surrounding;  // per step, D rows
  std::vector<Vec> central;                   // per step
};

inline double srgn(const rgn::SRgnConfig& cfg, const rgn::ParameterStore& p, const std::vector<Vec>& subjects,
                   StarTrace* trace = nullptr) {
  const std::size_t D = cfg.d;
  std::vector<Vec> hd(D);
  for (std::size_t d = 0; d < D; ++d)
    for (const auto& s : subjects) hd[d].push_back(s[d]);
  Vec hc = pool_rows(cfg.init_pool, hd);
  if (trace) {
    trace->surrounding.push_back(hd);
    trace->central.push_back(hc);
  }
  for (std::size_t k = 1; k <= cfg.k; ++k) {
    const std::string pre = "srgn.layer" + std::to_string(k) + ".";
    const Mat w_mess = load(p, pre + "w_mess");
    const Mat w_mess_c = cfg.untie_central_message ? load(p, pre + "w_mess_central") : w_mess;
    const Mat w_surr = load(p, pre + "w_surr");
    const Mat w_cen = load(p, pre + "w_cen");
    std::vector<Vec> md(D);
    for (std::size_t d = 0; d < D; ++d) md[d] = relu_times(hd[d], w_mess);
    const Vec mc = relu_times(hc, w_mess_c);
    std::vector<Vec> next(D);
    for (std::size_t d = 0; d < D; ++d) next[d] = relu_times(join(md[d], mc), w_surr);
    const Vec ma = pool_rows(cfg.aggre_pool, md);
    hc = relu_times(join(mc, ma), w_cen);
    hd = next;
    if (trace) {
      trace->surrounding.push_back(hd);
      trace->central.push_back(hc);
    }
  }
  Vec z = hc;
  for (const auto& r : hd) z.insert(z.end(), r.begin(), r.end());
  return head(p, "srgn.head.", z);
}

// ---------------------------------------------------------------------------
// Hierarchical graph.

// Children of every upper node, 0-based, from the piecewise adjacency rule
// evaluated entry by entry over the full N_prev x N_cur grid.
inline std::vector<std::vector<std::size_t>> adjacency_groups(std::size_t n_prev, std::size_t n_cur) {
  const std::size_t C = n_prev % n_cur;
  const std::size_t hi = (n_prev + n_cur - 1) / n_cur, lo = n_prev / n_cur;
  std::vector<std::vector<std::size_t>> groups(n_cur);
  for (std::size_t nl = 1; nl <= n_cur; ++nl) {
    for (std::size_t np = 1; np <= n_prev; ++np) {
      bool a;
      if (nl <= C) {
        a = hi * (nl - 1) < np && np <= hi * nl;
      } else {
        const long long shifted = (long long)np - (long long)C;
        a = (long long)(lo * (nl - 1)) < shifted && shifted <= (long long)(lo * nl);
      }
      if (a) groups[nl - 1].push_back(np - 1);
    }
  }
  return groups;
}

inline double cos_sim(const Vec& a, const Vec& b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  const double na = std::sqrt(aa), nb = std::sqrt(bb);
  if (na < 1e-12 || nb < 1e-12) return 0;
  return ab / (na * nb);
}

struct HierTrace {
  std::vector<std::vector<Vec>> attention;        // per latent layer, per parent group
  std::vector<std::vector<std::vector<Vec>>> h;   // per step, per layer, rows
};

inline double hrgn(const rgn::HRgnConfig& cfg, const rgn::ParameterStore& p, const std::vector<Vec>& subjects,
                   HierTrace* trace = nullptr) {
  std::vector<std::size_t> widths{cfg.d};
  widths.insert(widths.end(), cfg.latent.begin(), cfg.latent.end());
  const std::size_t L = widths.size() - 1;
  std::vector<std::vector<std::vector<std::size_t>>> groups(L + 1);
  for (std::size_t l = 1; l <= L; ++l) groups[l] = adjacency_groups(widths[l - 1], widths[l]);

  std::vector<std::vector<Vec>> h(L + 1);
  for (std::size_t d = 0; d < cfg.d; ++d) {
    Vec node;
    for (const auto& s : subjects) node.push_back(s[d]);
    h[0].push_back(node);
  }
  for (std::size_t l = 1; l <= L; ++l) {
    std::vector<Vec> att_layer;
    for (const auto& g : groups[l]) {
      std::vector<Vec> kids;
      for (auto s : g) kids.push_back(h[l - 1][s]);
      if (cfg.init_mode == rgn::HierInitMode::self_attention) {
        const Mat w0 = load(p, "hrgn.att.w0"), b0 = load(p, "hrgn.att.b0");
        const Mat w1 = load(p, "hrgn.att.w1"), b1 = load(p, "hrgn.att.b1");
        Vec alpha;
        for (const auto& kid : kids) {
          Vec hidden = times(kid, w0);
          double a = b1[0][0];
          for (std::size_t j = 0; j < hidden.size(); ++j) a += std::tanh(hidden[j] + b0[0][j]) * w1[j][0];
          alpha.push_back(a);
        }
        const double top = *std::max_element(alpha.begin(), alpha.end());
        double z = 0;
        for (auto& a : alpha) z += (a = std::exp(a - top));
        for (auto& a : alpha) a /= z;
        Vec node(kids[0].size(), 0.0);
        for (std::size_t s = 0; s < kids.size(); ++s)
          for (std::size_t j = 0; j < node.size(); ++j) node[j] += alpha[s] * kids[s][j];
        att_layer.push_back(alpha);
        h[l].push_back(node);
      } else {
        h[l].push_back(pool_rows(cfg.init_mode == rgn::HierInitMode::avg ? rgn::PoolKind::avg : rgn::PoolKind::max,
                                 kids));
      }
    }
    if (trace) trace->attention.push_back(att_layer);
  }
  if (trace) trace->h.push_back(h);

  for (std::size_t k = 1; k <= cfg.k; ++k) {
    const std::string pre = "hrgn.layer" + std::to_string(k) + ".";
    const Mat u_trans = load(p, pre + "u_trans");
    const Mat u_up = load(p, pre + "u_up");
    const Mat u_down = load(p, pre + "u_down");
    std::vector<std::vector<Vec>> m(L + 1), c(L + 1), out(L + 1);
    for (std::size_t l = 0; l <= L; ++l)
      for (const auto& row : h[l]) m[l].push_back(relu_times(row, u_trans));
    c[0] = m[0];
    for (std::size_t l = 1; l <= L; ++l) {
      const auto& lower = cfg.lower_input_mode == rgn::LowerInputMode::comprehensive ? c[l - 1] : m[l - 1];
      for (std::size_t n = 0; n < widths[l]; ++n) {
        std::vector<Vec> kids;
        for (auto s : groups[l][n]) kids.push_back(lower[s]);
        c[l].push_back(relu_times(join(m[l][n], pool_rows(cfg.aggre_pool, kids)), u_up));
      }
    }
    if (widths[L] == 1) {
      out[L] = c[L];
    } else {
      for (std::size_t n = 0; n < widths[L]; ++n) {
        Vec acc(c[L][n].size(), 0.0);
        for (std::size_t s = 0; s < widths[L]; ++s) {
          const double w = cos_sim(c[L][n], c[L][s]);
          for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += w * c[L][s][j];
        }
        out[L].push_back(acc);
      }
    }
    for (std::size_t l = L; l-- > 0;) {
      out[l].resize(widths[l]);
      for (std::size_t n = 0; n < widths[l + 1]; ++n)
        for (auto s : groups[l + 1][n]) out[l][s] = relu_times(join(c[l][s], out[l + 1][n]), u_down);
    }
    h = out;
    if (trace) trace->h.push_back(h);
  }
  Vec z;
  for (const auto& layer : h)
    for (const auto& row : layer) z.insert(z.end(), row.begin(), row.end());
  return head(p, "hrgn.head.", z);
}

}  // namespace oracle
