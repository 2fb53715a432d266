#include "rantl/store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <chrono>
#include <cstring>
#include <ctime>
#include <fstream>
#include <map>
#include <sstream>
#include <system_error>

#include "rantl/digest.hpp"

namespace fs = std::filesystem;

namespace rantl {
namespace {

// RAII flock on <root>/lock.
class StoreLock {
 public:
  StoreLock(const fs::path& root, bool exclusive) {
    const fs::path path = root / "lock";
    fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0) {
      // A read-only store can still be read; writers must get the lock.
      if (!exclusive) return;
      throw StoreError(StoreErrorKind::io,
                       "cannot open lock file " + path.string() + ": " + std::strerror(errno));
    }
    if (::flock(fd_, exclusive ? LOCK_EX : LOCK_SH) != 0) {
      const int err = errno;
      ::close(fd_);
      throw StoreError(StoreErrorKind::io,
                       "cannot lock " + path.string() + ": " + std::strerror(err));
    }
  }
  ~StoreLock() {
    if (fd_ >= 0) ::close(fd_);  // closing releases the lock
  }
  StoreLock(const StoreLock&) = delete;
  StoreLock& operator=(const StoreLock&) = delete;

 private:
  int fd_ = -1;
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw StoreError(StoreErrorKind::integrity, "missing or unreadable " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& data) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << data;
  out.flush();
  if (!out) throw StoreError(StoreErrorKind::io, "cannot write " + p.string());
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <class T>
T parse_number(const std::string& text, const std::string& what, const fs::path& file) {
  T v{};
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
    throw StoreError(StoreErrorKind::format,
                     file.string() + ": bad " + what + " value '" + text + "'");
  return v;
}

std::string join_ints(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(v[i]);
  }
  return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string meta_text(const ExpertArtifact& a) {
  std::string res;
  for (std::size_t i = 0; i < a.resources.size(); ++i) {
    if (i) res += ',';
    res += to_string(a.resources[i]);
  }
  std::string out;
  out += "task_id = " + a.task_id + '\n';
  out += "resources = " + res + '\n';
  out += "signature = " + join_ints(a.signature) + '\n';
  out += "action_grid = " + std::to_string(a.action_grid) + '\n';
  out += "training_tti = " + std::to_string(a.training_tti) + '\n';
  out += "final_mean_reward = " + format_double(a.final_mean_reward) + '\n';
  out += "created_at = " + a.created_at + '\n';
  out += "sequence = " + std::to_string(a.sequence) + '\n';
  out += "config_hash = " + a.config_hash + '\n';
  return out;
}

std::map<std::string, std::string> parse_meta(const std::string& text, const fs::path& file) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto eq = line.find(" = ");
    if (eq == std::string::npos)
      throw StoreError(StoreErrorKind::format, file.string() + ": malformed line '" + line + "'");
    kv[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return kv;
}

std::string now_utc() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

void ExpertArtifact::validate() const {
  auto bad = [&](const std::string& what) {
    throw StoreError(StoreErrorKind::format, "artifact '" + task_id + "': " + what);
  };
  if (task_id.empty()) bad("empty task id");
  if (task_id.find_first_of("\n\r") != std::string::npos) bad("task id contains a line break");
  if (resources.empty()) bad("no resource dimension");
  std::vector<int> expected;
  for (ResourceDim d : resources) {
    const auto sig = signature_of(d);
    expected.insert(expected.end(), sig.begin(), sig.end());
  }
  if (signature != expected) bad("signature does not match its resource dimensions");
  if (signature != table.signature()) bad("signature disagrees with the table");
  if (action_grid != table.n_actions()) bad("action grid disagrees with the table");
  if (training_tti != table.training_tti) bad("training TTIs disagree with the table");
  if (final_mean_reward != table.final_mean_reward) bad("final reward disagrees with the table");
  if (config_hash.find_first_of("\n\r") != std::string::npos) bad("config hash contains a line break");
}

ExpertArtifact make_artifact(std::string task_id, ResourceDim dim, QTable table,
                             std::string config_hash) {
  ExpertArtifact a;
  a.task_id = std::move(task_id);
  a.resources = {dim};
  a.signature = signature_of(dim);
  a.action_grid = table.n_actions();
  a.training_tti = table.training_tti;
  a.final_mean_reward = table.final_mean_reward;
  a.table = std::move(table);
  a.config_hash = std::move(config_hash);
  return a;
}

ExpertStore::ExpertStore(fs::path root) : root_(std::move(root)) {}

fs::path ExpertStore::artifact_dir(const std::string& task_id) const {
  return experts_dir() / sha256_hex(task_id).substr(0, 32);
}

std::string ExpertStore::save(ExpertArtifact artifact) const {
  artifact.validate();
  std::error_code ec;
  fs::create_directories(experts_dir(), ec);
  if (ec)
    throw StoreError(StoreErrorKind::io,
                     "cannot create " + experts_dir().string() + ": " + ec.message());

  StoreLock lock(root_, true);
  const fs::path dir = artifact_dir(artifact.task_id);
  if (fs::exists(dir))
    throw StoreError(StoreErrorKind::duplicate,
                     "task id '" + artifact.task_id + "' already exists in " + root_.string());

  long last = 0;
  for (const auto& entry : fs::directory_iterator(experts_dir())) {
    if (!entry.is_directory() || entry.path().filename().string().starts_with(".")) continue;
    last = std::max(last, read_dir(entry.path()).sequence);
  }
  artifact.sequence = last + 1;
  if (artifact.created_at.empty()) artifact.created_at = now_utc();

  std::ostringstream table;
  artifact.table.save(table);
  const std::string meta = meta_text(artifact);
  const std::string checksum =
      sha256_hex(meta) + "  meta\n" + sha256_hex(table.str()) + "  table\n";

  // Stage in a hidden directory, then rename: readers never see half an artifact.
  const fs::path staging = experts_dir() / ("." + dir.filename().string() + ".tmp");
  fs::remove_all(staging, ec);
  fs::create_directory(staging, ec);
  if (ec) throw StoreError(StoreErrorKind::io, "cannot create " + staging.string());
  write_file(staging / "meta", meta);
  write_file(staging / "table", table.str());
  write_file(staging / "checksum", checksum);
  fs::rename(staging, dir, ec);
  if (ec)
    throw StoreError(StoreErrorKind::io, "cannot publish " + dir.string() + ": " + ec.message());
  return artifact.task_id;
}

ExpertArtifact ExpertStore::read_dir(const fs::path& dir) const {
  const std::string checksum = read_file(dir / "checksum");
  std::map<std::string, std::string> sums;
  for (const auto& line : split(checksum, '\n')) {
    if (line.empty()) continue;
    const auto sp = line.find("  ");
    if (sp == std::string::npos)
      throw StoreError(StoreErrorKind::integrity, (dir / "checksum").string() + ": malformed");
    sums[line.substr(sp + 2)] = line.substr(0, sp);
  }
  std::map<std::string, std::string> content;
  for (const char* name : {"meta", "table"}) {
    const fs::path file = dir / name;
    content[name] = read_file(file);
    const auto it = sums.find(name);
    if (it == sums.end() || it->second != sha256_hex(content[name]))
      throw StoreError(StoreErrorKind::integrity, "checksum mismatch in " + file.string());
  }

  const fs::path meta_path = dir / "meta";
  const auto kv = parse_meta(content["meta"], meta_path);
  auto field = [&](const std::string& key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end())
      throw StoreError(StoreErrorKind::format, meta_path.string() + ": missing " + key);
    return it->second;
  };

  ExpertArtifact a;
  a.task_id = field("task_id");
  try {
    for (const auto& r : split(field("resources"), ',')) a.resources.push_back(parse_resource(r));
  } catch (const std::invalid_argument& e) {
    throw StoreError(StoreErrorKind::format, meta_path.string() + ": " + e.what());
  }
  for (const auto& d : split(field("signature"), ','))
    a.signature.push_back(parse_number<int>(d, "signature", meta_path));
  a.action_grid = parse_number<int>(field("action_grid"), "action_grid", meta_path);
  a.training_tti = parse_number<long>(field("training_tti"), "training_tti", meta_path);
  a.final_mean_reward =
      parse_number<double>(field("final_mean_reward"), "final_mean_reward", meta_path);
  a.created_at = field("created_at");
  a.sequence = parse_number<long>(field("sequence"), "sequence", meta_path);
  a.config_hash = field("config_hash");

  std::istringstream table(content["table"]);
  try {
    a.table = QTable::load(table);
  } catch (const std::exception& e) {
    throw StoreError(StoreErrorKind::format, (dir / "table").string() + ": " + e.what());
  }
  a.validate();
  return a;
}

ExpertArtifact ExpertStore::load(const std::string& task_id) const {
  StoreLock lock(root_, false);
  const fs::path dir = artifact_dir(task_id);
  if (!fs::is_directory(dir))
    throw StoreError(StoreErrorKind::not_found,
                     "no expert '" + task_id + "' in " + root_.string());
  return read_dir(dir);
}

std::vector<ExpertArtifact> ExpertStore::list() const {
  std::vector<ExpertArtifact> out;
  if (!fs::is_directory(experts_dir())) return out;
  StoreLock lock(root_, false);
  for (const auto& entry : fs::directory_iterator(experts_dir())) {
    if (!entry.is_directory() || entry.path().filename().string().starts_with(".")) continue;
    out.push_back(read_dir(entry.path()));
  }
  std::sort(out.begin(), out.end(),
            [](const ExpertArtifact& a, const ExpertArtifact& b) { return a.sequence < b.sequence; });
  return out;
}

std::vector<ExpertArtifact> ExpertStore::select(const TargetDescriptor& target) const {
  auto contains = [](const auto& haystack, const auto& needle) {
    return std::find(haystack.begin(), haystack.end(), needle) != haystack.end();
  };
  std::vector<ExpertArtifact> out;
  for (auto& a : list()) {
    if (a.action_grid != target.action_grid) continue;
    if (!std::all_of(a.signature.begin(), a.signature.end(),
                     [&](int d) { return contains(target.signature, d); }))
      continue;
    if (!std::all_of(a.resources.begin(), a.resources.end(),
                     [&](ResourceDim r) { return contains(target.dimensions, r); }))
      continue;
    out.push_back(std::move(a));
  }
  std::stable_sort(out.begin(), out.end(), [](const ExpertArtifact& a, const ExpertArtifact& b) {
    if (a.final_mean_reward != b.final_mean_reward) return a.final_mean_reward > b.final_mean_reward;
    return a.sequence > b.sequence;
  });
  return out;
}

std::string save_expert(const fs::path& store, ExpertArtifact artifact) {
  return ExpertStore(store).save(std::move(artifact));
}

ExpertArtifact load_expert(const fs::path& store, const std::string& task_id) {
  return ExpertStore(store).load(task_id);
}

std::vector<ExpertArtifact> select_experts(const fs::path& store, const TargetDescriptor& target) {
  return ExpertStore(store).select(target);
}

}  // namespace rantl
