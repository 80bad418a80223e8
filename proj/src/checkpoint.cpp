// Binary checkpoint of a built SolverState; layout documented in solver.hpp.

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "hps/solver.hpp"

namespace hps {

namespace {

constexpr char kMagic[8] = {'H', 'P', 'S', 'C', 'K', 'P', 'T', '\0'};
constexpr std::uint32_t kVersion = 2;

class Writer {
 public:
  explicit Writer(const std::string& path) : os_(path, std::ios::binary) {
    if (!os_) throw std::runtime_error("checkpoint: cannot open " + path + " for writing");
  }
  void raw(const void* p, std::size_t n) { os_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); }
  void u64(std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    raw(b, 8);
  }
  void u32(std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    raw(b, 4);
  }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void u8(std::uint8_t v) { raw(&v, 1); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void matrix(const CMatrix& m) {
    u64(static_cast<std::uint64_t>(m.rows()));
    u64(static_cast<std::uint64_t>(m.cols()));
    for (std::size_t k = 0; k < m.size(); ++k) {
      f64(m.data()[k].real());
      f64(m.data()[k].imag());
    }
  }
  void finish() {
    os_.flush();
    if (!os_) throw std::runtime_error("checkpoint: write failed");
  }

 private:
  std::ofstream os_;
};

class Reader {
 public:
  explicit Reader(const std::string& path) : is_(path, std::ios::binary) {
    if (!is_) throw std::runtime_error("checkpoint: cannot open " + path);
  }
  void raw(void* p, std::size_t n) {
    is_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!is_) throw std::runtime_error("checkpoint: truncated file");
  }
  std::uint64_t u64() {
    unsigned char b[8];
    raw(b, 8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
  }
  std::uint32_t u32() {
    unsigned char b[4];
    raw(b, 4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
    return v;
  }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  std::uint8_t u8() {
    std::uint8_t v;
    raw(&v, 1);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  CMatrix matrix() {
    const auto rows = u64(), cols = u64();
    if (rows > (1u << 20) || cols > (1u << 20)) throw std::runtime_error("checkpoint: implausible matrix size");
    CMatrix m(static_cast<Index>(rows), static_cast<Index>(cols));
    for (std::size_t k = 0; k < m.size(); ++k) {
      const double re = f64();
      m.data()[k] = cplx(re, f64());
    }
    return m;
  }
  bool at_end() { return is_.peek() == std::char_traits<char>::eof(); }

 private:
  std::ifstream is_;
};

}  // namespace

void SolverState::save(const std::string& path) const {
  Writer w(path);
  w.raw(kMagic, sizeof kMagic);
  w.u32(kVersion);
  w.i32(tree().n_c());
  w.i32(tree().levels());
  w.f64(kappa_);
  w.f64(eta_.real());
  w.f64(eta_.imag());
  w.u64(coefficient_fp_);
  const Rect& d = tree().domain();
  for (double v : {d.xmin, d.xmax, d.ymin, d.ymax}) w.f64(v);
  w.u64(static_cast<std::uint64_t>(tree().n_boxes()));
  for (int id = 1; id <= tree().n_boxes(); ++id) {
    w.i32(id);
    if (const auto& l = leaves_[id - 1]) {
      const bool with_r = !l->r.empty();
      w.u8(0);
      w.u8(with_r ? 4 : 3);
      w.matrix(l->psi);
      w.matrix(l->y);
      w.matrix(l->gamma);
      if (with_r) w.matrix(l->r);
    } else {
      const MergeOperators& m = *merges_[id - 1];
      const bool with_r = !m.r.empty();
      w.u8(1);
      w.u8(with_r ? 8 : 7);
      w.f64(m.w_condition);
      for (const CMatrix* x : {&m.phi_alpha, &m.phi_beta, &m.w_inv, &m.r33_alpha, &m.r33_beta, &m.r13_alpha, &m.r23_beta})
        w.matrix(*x);
      if (with_r) w.matrix(m.r);
    }
  }
  w.finish();
}

SolverState SolverState::load(const std::string& path) {
  Reader r(path);
  char magic[8];
  r.raw(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) throw std::runtime_error("checkpoint: bad magic in " + path);
  if (const auto v = r.u32(); v != kVersion)
    throw std::runtime_error("checkpoint: unsupported version " + std::to_string(v));
  const int n_c = r.i32();
  const int levels = r.i32();
  SolverState st;
  st.kappa_ = r.f64();
  const double er = r.f64();
  st.eta_ = cplx(er, r.f64());
  st.coefficient_fp_ = r.u64();
  Rect dom;
  dom.xmin = r.f64();
  dom.xmax = r.f64();
  dom.ymin = r.f64();
  dom.ymax = r.f64();
  st.tree_ = std::make_shared<const BoxTree>(BoxTree::build_uniform(dom, levels, n_c));
  const BoxTree& tree = *st.tree_;
  if (r.u64() != static_cast<std::uint64_t>(tree.n_boxes())) throw std::runtime_error("checkpoint: box count mismatch");
  st.leaves_.resize(static_cast<std::size_t>(tree.n_boxes()));
  st.merges_.resize(static_cast<std::size_t>(tree.n_boxes()));
  st.plan_ = ThreadPlan::serial(levels);
  for (int expect = 1; expect <= tree.n_boxes(); ++expect) {
    if (r.i32() != expect) throw std::runtime_error("checkpoint: box records out of order");
    const int kind = r.u8();
    const int count = r.u8();
    const bool leaf = tree.node(expect).is_leaf();
    if (kind != (leaf ? 0 : 1)) throw std::runtime_error("checkpoint: record kind does not match tree");
    if (leaf) {
      if (count != 3 && count != 4) throw std::runtime_error("checkpoint: bad leaf record");
      LeafOperators op;
      op.psi = r.matrix();
      op.y = r.matrix();
      op.gamma = r.matrix();
      if (count == 4) op.r = r.matrix();
      st.leaves_[expect - 1] = std::move(op);
    } else {
      if (count != 7 && count != 8) throw std::runtime_error("checkpoint: bad merge record");
      MergeOperators m;
      m.w_condition = r.f64();
      for (CMatrix* x : {&m.phi_alpha, &m.phi_beta, &m.w_inv, &m.r33_alpha, &m.r33_beta, &m.r13_alpha, &m.r23_beta})
        *x = r.matrix();
      if (count == 8) m.r = r.matrix();
      m.n1 = m.r13_alpha.rows();
      m.n2 = m.r23_beta.rows();
      m.n3 = m.w_inv.rows();
      const auto& idx = tree.sibling_sets(expect);
      if (m.n1 != idx.n1() || m.n2 != idx.n2() || m.n3 != idx.n3())
        throw std::runtime_error("checkpoint: merge record sizes do not match tree");
      st.merges_[expect - 1] = std::move(m);
    }
  }
  if (!r.at_end()) throw std::runtime_error("checkpoint: trailing bytes");
  return st;
}

}  // namespace hps
