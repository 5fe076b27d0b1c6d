#include "symstat/artifacts.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "symstat/errors.hpp"

namespace symstat {

static_assert(std::endian::native == std::endian::little, "artifact payloads assume a little-endian host");

namespace {

template <class T>
void put(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  Reader(const std::string& bytes, std::string what) : bytes_(bytes), what_(std::move(what)) {}

  template <class T>
  T get() {
    if (pos_ + sizeof(T) > bytes_.size()) raise(ErrorKind::IoError, what_ + ": truncated payload");
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }
  std::string take(size_t n) {
    if (pos_ + n > bytes_.size()) raise(ErrorKind::IoError, what_ + ": truncated payload");
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  void expect_end() const {
    if (pos_ != bytes_.size()) raise(ErrorKind::IoError, what_ + ": trailing bytes in payload");
  }

 private:
  const std::string& bytes_;
  std::string what_;
  size_t pos_ = 0;
};

constexpr char kBasisMagic[8] = {'S', 'Y', 'M', 'B', 'A', 'S', 'I', 'S'};

std::vector<int> one_based(const std::vector<int>& p) {
  std::vector<int> out;
  for (int x : p) out.push_back(x + 1);
  return out;
}

std::vector<int> zero_based(const nlohmann::json& p) {
  std::vector<int> out;
  for (const auto& x : p) out.push_back(x.get<int>() - 1);
  return out;
}

template <class T>
T field(const nlohmann::json& doc, const char* key, const std::string& what) {
  if (!doc.contains(key)) raise(ErrorKind::IoError, what + ": missing field '" + key + "'");
  try {
    return doc.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    raise(ErrorKind::IoError, what + ": bad field '" + std::string(key) + "'");
  }
}

}  // namespace

std::string content_hash(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

std::string file_hash(const fs::path& path) { return content_hash(read_file(path)); }

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorKind::IoError, "cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const fs::path& path, const std::string& bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) raise(ErrorKind::IoError, "cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) raise(ErrorKind::IoError, "short write to " + path.string());
  }
  fs::rename(tmp, path);
}

nlohmann::json read_json(const fs::path& path) {
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    raise(ErrorKind::IoError, path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const nlohmann::json& doc) { write_file(path, doc.dump(2) + "\n"); }

void write_basis(const fs::path& dir, const AngularBasisSet& basis, int n_q, const std::vector<int>& p_set) {
  const auto& g = basis.group();
  std::string bin(kBasisMagic, sizeof(kBasisMagic));
  put<std::uint32_t>(bin, 1);
  const std::string name = g.name();
  put<std::uint32_t>(bin, static_cast<std::uint32_t>(name.size()));
  bin += name;
  put<std::int32_t>(bin, 0);
  put<std::int32_t>(bin, basis.l_max());
  nlohmann::json counts = nlohmann::json::array();
  int n_vec = 0;
  for (int l = 0; l <= basis.l_max(); ++l) {
    const auto& s = basis.slice(l);
    nlohmann::json row = nlohmann::json::array();
    for (int p = 0; p < g.irrep_count(); ++p) {
      row.push_back(s.multiplicity(p));
      if (std::find(p_set.begin(), p_set.end(), p) != p_set.end()) n_vec += s.multiplicity(p) * n_q;
      for (int n = 0; n < s.multiplicity(p); ++n) {
        const auto& b = s.coeff(p, n);
        for (Eigen::Index i = 0; i < b.rows(); ++i)
          for (Eigen::Index j = 0; j < b.cols(); ++j) put<double>(bin, b(i, j));
      }
    }
    counts.push_back(row);
  }
  write_file(dir / "basis.bin", bin);
  nlohmann::json m;
  m["format"] = "symstat-basis";
  m["version"] = 1;
  m["group"] = name;
  m["dims"] = g.dims();
  m["l_min"] = 0;
  m["l_max"] = basis.l_max();
  m["n_q"] = n_q;
  m["p_set"] = one_based(p_set);
  m["counts"] = counts;
  m["vector_coefficients"] = n_vec;
  m["payload"] = "basis.bin";
  m["payload_hash"] = content_hash(bin);
  write_json(dir / "basis.json", m);
}

AngularBasisSet read_basis(const fs::path& dir, std::shared_ptr<const PointGroup> group) {
  const std::string bin = read_file(dir / "basis.bin");
  Reader r(bin, "basis.bin");
  if (r.take(sizeof(kBasisMagic)) != std::string(kBasisMagic, sizeof(kBasisMagic)))
    raise(ErrorKind::IoError, "basis.bin: bad magic");
  if (r.get<std::uint32_t>() != 1) raise(ErrorKind::IoError, "basis.bin: unsupported version");
  const auto len = r.get<std::uint32_t>();
  if (r.take(len) != group->name()) raise(ErrorKind::IoError, "basis.bin: built for another group");
  const int l_min = r.get<std::int32_t>();
  const int l_max = r.get<std::int32_t>();
  if (l_min != 0 || l_max < 0) raise(ErrorKind::IoError, "basis.bin: bad degree range");
  const auto counts = tabulate_counts(*group, l_max);
  std::vector<AngularSlice> slices;
  for (int l = 0; l <= l_max; ++l) {
    std::vector<std::vector<Eigen::MatrixXd>> coeffs(group->irrep_count());
    for (int p = 0; p < group->irrep_count(); ++p) {
      for (int n = 0; n < counts[l][p]; ++n) {
        Eigen::MatrixXd b(group->irrep_dim(p), 2 * l + 1);
        for (Eigen::Index i = 0; i < b.rows(); ++i)
          for (Eigen::Index j = 0; j < b.cols(); ++j) b(i, j) = r.get<double>();
        coeffs[p].push_back(std::move(b));
      }
    }
    slices.emplace_back(l, std::move(coeffs));
  }
  r.expect_end();
  return AngularBasisSet(std::move(group), std::move(slices));
}

nlohmann::json params_manifest(const ModelParams& params) {
  const auto& m = *params.model;
  nlohmann::json j;
  j["format"] = "symstat-params";
  j["version"] = 1;
  j["group"] = m.group().name();
  j["l_max"] = m.index.l_max();
  j["n_q"] = m.index.n_q();
  j["p_set"] = one_based(m.index.p_set());
  j["radius"] = m.radius();
  j["n_c"] = m.index.n_c();
  j["n_vec"] = m.index.n_vec();
  j["mean_count"] = m.index.mean_count();
  j["diagonal"] = params.is_diagonal();
  return j;
}

std::shared_ptr<const SignalModel> model_from_manifest(const nlohmann::json& manifest, int workers) {
  const std::string what = "params manifest";
  auto group = std::make_shared<const PointGroup>(group_from_name(field<std::string>(manifest, "group", what)));
  const int l_max = field<int>(manifest, "l_max", what);
  const int n_q = field<int>(manifest, "n_q", what);
  const double radius = field<double>(manifest, "radius", what);
  if (!manifest.contains("p_set")) raise(ErrorKind::IoError, what + ": missing field 'p_set'");
  auto angular = std::make_shared<const AngularBasisSet>(build_angular_basis_set(group, l_max, workers));
  return make_model(angular, radius, l_max, n_q, zero_based(manifest["p_set"]));
}

void write_params(const fs::path& dir, const ModelParams& params, const std::string& stem) {
  std::string bin;
  for (Eigen::Index i = 0; i < params.mu.size(); ++i) put<double>(bin, params.mu[i]);
  for (const auto& v : params.v)
    for (Eigen::Index i = 0; i < v.rows(); ++i)
      for (Eigen::Index j = 0; j < v.cols(); ++j) put<double>(bin, v(i, j));
  write_file(dir / (stem + ".bin"), bin);
  auto m = params_manifest(params);
  m["payload"] = stem + ".bin";
  m["payload_hash"] = content_hash(bin);
  write_json(dir / (stem + ".json"), m);
}

ModelParams read_params(const fs::path& dir, const std::string& stem, int workers) {
  const auto manifest = read_json(dir / (stem + ".json"));
  if (manifest.value("format", "") != "symstat-params") raise(ErrorKind::IoError, stem + ".json is not a params manifest");
  auto model = model_from_manifest(manifest, workers);
  const std::string bin = read_file(dir / field<std::string>(manifest, "payload", "params manifest"));
  Reader r(bin, stem + ".bin");
  ModelParams p;
  p.model = model;
  p.mu.resize(model->index.mean_count());
  for (Eigen::Index i = 0; i < p.mu.size(); ++i) p.mu[i] = r.get<double>();
  for (int pp : model->index.p_set()) {
    const auto nb = static_cast<Eigen::Index>(model->index.blocks_of(pp).size());
    Eigen::MatrixXd v(nb, nb);
    for (Eigen::Index i = 0; i < nb; ++i)
      for (Eigen::Index j = 0; j < nb; ++j) v(i, j) = r.get<double>();
    p.v.push_back(std::move(v));
  }
  r.expect_end();
  return p;
}

void write_stack(const fs::path& dir, const ImageStack& stack) {
  std::string bin;
  bin.reserve(static_cast<size_t>(stack.images.size()) * 8);
  for (Eigen::Index i = 0; i < stack.images.cols(); ++i) {
    for (Eigen::Index px = 0; px < stack.images.rows(); ++px) {
      put<float>(bin, static_cast<float>(stack.images(px, i).real()));
      put<float>(bin, static_cast<float>(stack.images(px, i).imag()));
    }
  }
  write_file(dir / "stack.bin", bin);
  nlohmann::json m;
  m["format"] = "symstat-stack";
  m["version"] = 1;
  m["domain"] = "reciprocal";
  m["side"] = stack.geometry.side;
  m["pixel_size"] = stack.geometry.pixel_size;
  m["n_v"] = stack.count();
  m["sigma2"] = stack.sigma2;
  m["snr"] = stack.snr;
  m["seed"] = stack.seed;
  m["payload"] = "stack.bin";
  m["payload_hash"] = content_hash(bin);
  if (stack.has_truth()) {
    std::string truth;
    for (const auto& r : stack.true_rotations)
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) put<double>(truth, r(a, b));
    for (Eigen::Index i = 0; i < stack.true_coefficients.cols(); ++i)
      for (Eigen::Index c = 0; c < stack.true_coefficients.rows(); ++c) put<double>(truth, stack.true_coefficients(c, i));
    write_file(dir / "truth.bin", truth);
    m["truth"] = {{"payload", "truth.bin"},
                  {"n_c", stack.true_coefficients.rows()},
                  {"payload_hash", content_hash(truth)}};
  } else {
    m["truth"] = nullptr;
  }
  write_json(dir / "stack.json", m);
}

ImageStack read_stack(const fs::path& dir) {
  const auto m = read_json(dir / "stack.json");
  const std::string what = "stack manifest";
  if (m.value("format", "") != "symstat-stack") raise(ErrorKind::IoError, "stack.json is not a stack manifest");
  if (m.value("domain", "") != "reciprocal") raise(ErrorKind::IoError, "only reciprocal-space stacks are supported");
  ImageStack s;
  s.geometry.side = field<int>(m, "side", what);
  s.geometry.pixel_size = field<double>(m, "pixel_size", what);
  s.geometry.validate();
  const int n_v = field<int>(m, "n_v", what);
  s.sigma2 = field<double>(m, "sigma2", what);
  s.snr = field<double>(m, "snr", what);
  s.seed = field<std::uint64_t>(m, "seed", what);
  const std::string bin = read_file(dir / field<std::string>(m, "payload", what));
  Reader r(bin, "stack.bin");
  const int npix = s.geometry.pixels();
  s.images.resize(npix, n_v);
  for (int i = 0; i < n_v; ++i) {
    for (int px = 0; px < npix; ++px) {
      const float re = r.get<float>();
      const float im = r.get<float>();
      s.images(px, i) = cdouble(re, im);
    }
  }
  r.expect_end();
  if (m.contains("truth") && !m["truth"].is_null()) {
    const auto& t = m["truth"];
    const int n_c = field<int>(t, "n_c", what);
    const std::string tb = read_file(dir / field<std::string>(t, "payload", what));
    Reader tr(tb, "truth.bin");
    s.true_rotations.resize(n_v);
    for (auto& rot : s.true_rotations)
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) rot(a, b) = tr.get<double>();
    s.true_coefficients.resize(n_c, n_v);
    for (int i = 0; i < n_v; ++i)
      for (int c = 0; c < n_c; ++c) s.true_coefficients(c, i) = tr.get<double>();
    tr.expect_end();
  }
  return s;
}

void write_volume(const fs::path& dir, const VolumeGrid& volume, const std::string& stem) {
  std::string bin;
  for (double x : volume.data) put<float>(bin, static_cast<float>(x));
  write_file(dir / (stem + ".bin"), bin);
  nlohmann::json m;
  m["format"] = "symstat-volume";
  m["version"] = 1;
  m["side"] = volume.side;
  m["voxel_size"] = volume.voxel_size;
  m["origin"] = "centered";
  m["order"] = "x fastest, then y, then z";
  m["dtype"] = "float32";
  m["payload"] = stem + ".bin";
  m["payload_hash"] = content_hash(bin);
  write_json(dir / (stem + ".json"), m);
}

VolumeGrid read_volume(const fs::path& dir, const std::string& stem) {
  const auto m = read_json(dir / (stem + ".json"));
  const std::string what = "volume manifest";
  if (m.value("format", "") != "symstat-volume") raise(ErrorKind::IoError, stem + ".json is not a volume manifest");
  VolumeGrid v(field<int>(m, "side", what), field<double>(m, "voxel_size", what));
  const std::string bin = read_file(dir / field<std::string>(m, "payload", what));
  Reader r(bin, stem + ".bin");
  for (auto& x : v.data) x = r.get<float>();
  r.expect_end();
  return v;
}

std::string fsc_csv(const FSCCurve& curve) {
  std::ostringstream os;
  os << "k,fsc,energy\n" << std::setprecision(17);
  for (int s = 0; s < curve.size(); ++s) os << curve.k[s] << ',' << curve.fsc[s] << ',' << curve.energy[s] << '\n';
  return os.str();
}

nlohmann::json report_json(const RunReport& report) {
  nlohmann::json it = nlohmann::json::array();
  for (const auto& r : report.iterations)
    it.push_back({{"stage", r.stage}, {"iteration", r.iteration}, {"loglik", r.loglik}, {"q_gain", r.q_gain}});
  return {{"converged", report.converged},
          {"homogeneous_converged", report.homogeneous_converged},
          {"monotone", report.monotone},
          {"v_floor", report.v_floor},
          {"iterations", it}};
}

}  // namespace symstat
