#include "geosvg/render_oracle.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <csignal>

#include "geosvg/errors.hpp"

namespace geosvg {

using nlohmann::json;

namespace {

json rect_json(const Rect& r) { return {{"x", r.x}, {"y", r.y}, {"w", r.w}, {"h", r.h}}; }

Rect rect_from(const json& j, const char* what) {
  if (!j.is_object()) throw FormatError(std::string("measure response: ") + what + " must be an object");
  for (const char* k : {"x", "y", "w", "h"}) {
    if (!j.contains(k) || !j[k].is_number()) throw FormatError(std::string("measure response: ") + what + "." + k + " must be a number");
  }
  return {j["x"].get<double>(), j["y"].get<double>(), j["w"].get<double>(), j["h"].get<double>()};
}

}  // namespace

json request_to_json(const MeasureRequest& r) {
  return {{"id", r.id}, {"svg", r.svg}, {"canvas", {{"width", r.width}, {"height", r.height}}}, {"timeout_ms", r.timeout_ms}};
}

MeasureRequest request_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("id") || !doc["id"].is_string() || !doc.contains("svg") || !doc["svg"].is_string()) {
    throw FormatError("measure request: needs string 'id' and 'svg'");
  }
  MeasureRequest r;
  r.id = doc["id"].get<std::string>();
  r.svg = doc["svg"].get<std::string>();
  if (doc.contains("canvas")) {
    const json& c = doc["canvas"];
    r.width = c.value("width", 800.0);
    r.height = c.value("height", 600.0);
  }
  r.timeout_ms = doc.value("timeout_ms", 5000);
  if (r.timeout_ms <= 0) throw FormatError("measure request: timeout_ms must be positive");
  return r;
}

json response_to_json(const MeasureResponse& r) {
  json elements = json::array();
  for (const MeasuredElement& e : r.elements) {
    json el = {{"index", e.index}, {"kind", e.kind}, {"bbox", rect_json(e.bbox)}};
    if (e.text_bbox) el["text_bbox"] = rect_json(*e.text_bbox);
    elements.push_back(std::move(el));
  }
  json out = {{"version", r.version}, {"id", r.id}, {"ok", r.ok}, {"elements", std::move(elements)}};
  if (!r.error.empty()) out["error"] = r.error;
  if (!r.font_family.empty()) out["font_family"] = r.font_family;
  return out;
}

MeasureResponse response_from_json(const json& doc) {
  if (!doc.is_object()) throw FormatError("measure response: expected an object");
  MeasureResponse r;
  if (!doc.contains("version") || doc["version"] != "v1") throw FormatError("measure response: version must be \"v1\"");
  if (!doc.contains("id") || !doc["id"].is_string()) throw FormatError("measure response: missing id");
  if (!doc.contains("ok") || !doc["ok"].is_boolean()) throw FormatError("measure response: missing ok");
  r.id = doc["id"].get<std::string>();
  r.ok = doc["ok"].get<bool>();
  r.error = doc.value("error", std::string());
  r.font_family = doc.value("font_family", std::string());
  if (!r.ok && r.error.empty()) throw FormatError("measure response: ok=false requires an error");
  if (doc.contains("elements")) {
    if (!doc["elements"].is_array()) throw FormatError("measure response: elements must be an array");
    for (const json& e : doc["elements"]) {
      MeasuredElement m;
      if (!e.contains("index") || !e["index"].is_number_unsigned()) throw FormatError("measure response: element index");
      m.index = e["index"].get<std::size_t>();
      m.kind = e.value("kind", std::string());
      m.bbox = rect_from(e.value("bbox", json()), "bbox");
      if (e.contains("text_bbox")) m.text_bbox = rect_from(e["text_bbox"], "text_bbox");
      r.elements.push_back(std::move(m));
    }
  }
  return r;
}

MeasureResponse BuiltinOracle::measure(const MeasureRequest& request) {
  MeasureResponse resp;
  resp.id = request.id;
  resp.font_family = "builtin";
  try {
    const SvgScene scene = parse_svg(request.svg);
    if (!scene.geometry_ok()) {
      resp.error = scene.diagnostics().front();
      return resp;
    }
    for (std::size_t i = 0; i < scene.elements.size(); ++i) {
      const SvgElement& e = scene.elements[i];
      MeasuredElement m{i, std::string(to_string(e.kind)), e.global_bbox, std::nullopt};
      if (e.text_box) m.text_bbox = e.text_box->bbox;
      resp.elements.push_back(std::move(m));
    }
    resp.ok = true;
  } catch (const Error& e) {
    resp.error = e.what();
  }
  return resp;
}

bool apply_measurement(SvgScene& scene, const MeasureResponse& response, std::string* reason) {
  const auto fail = [&](std::string why) {
    if (reason) *reason = std::move(why);
    return false;
  };
  for (const MeasuredElement& m : response.elements) {
    if (m.index >= scene.elements.size()) return fail("element index " + std::to_string(m.index) + " out of range");
    SvgElement& e = scene.elements[m.index];
    if (!m.kind.empty() && m.kind != to_string(e.kind)) {
      return fail("element " + std::to_string(m.index) + " is <" + e.tag + ">, oracle reported " + m.kind);
    }
    if (!(m.bbox.w >= 0 && m.bbox.h >= 0)) return fail("negative measured size");
    if (e.kind == ElementKind::group) continue;
    e.global_bbox = m.bbox;
    if (e.kind == ElementKind::text && e.text_box) {
      e.text_box->bbox = m.text_bbox.value_or(m.bbox);
      e.global_bbox = e.text_box->bbox;
    }
  }
  return true;
}

ProcessOracle::ProcessOracle(std::string command) : command_(std::move(command)) {
  if (command_.empty()) throw Error("external renderer requires a command");
  start();
}

ProcessOracle::~ProcessOracle() { stop(); }

void ProcessOracle::start() {
  int in_pipe[2];
  int out_pipe[2];
  if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0) throw IoError("renderer: pipe() failed");
  const pid_t pid = fork();
  if (pid < 0) throw IoError("renderer: fork() failed");
  if (pid == 0) {
    // Own process group, so stop() also reaches whatever the shell spawned.
    setpgid(0, 0);
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    close(in_pipe[0]);
    close(in_pipe[1]);
    close(out_pipe[0]);
    close(out_pipe[1]);
    execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  setpgid(pid, pid);
  close(in_pipe[0]);
  close(out_pipe[1]);
  pid_ = pid;
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  buffer_.clear();
  // Writes to a dead child must surface as errors, not kill the caller.
  std::signal(SIGPIPE, SIG_IGN);
}

void ProcessOracle::stop() {
  if (to_child_ >= 0) close(to_child_);
  if (from_child_ >= 0) close(from_child_);
  to_child_ = from_child_ = -1;
  if (pid_ > 0) {
    // The service holds no state worth a graceful shutdown, and a hung one may ignore SIGTERM.
    kill(-pid_, SIGKILL);
    int status = 0;
    waitpid(pid_, &status, 0);
  }
  pid_ = -1;
}

std::optional<std::string> ProcessOracle::read_line(std::chrono::steady_clock::time_point deadline) {
  for (;;) {
    if (const std::size_t nl = buffer_.find('\n'); nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return line;
    }
    const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (remaining.count() <= 0) return std::nullopt;
    pollfd pfd{from_child_, POLLIN, 0};
    const int rc = poll(&pfd, 1, static_cast<int>(remaining.count()));
    if (rc < 0 && errno == EINTR) continue;
    if (rc <= 0) return std::nullopt;
    char chunk[65536];
    const ssize_t n = read(from_child_, chunk, sizeof chunk);
    if (n <= 0) return std::nullopt;
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

MeasureResponse ProcessOracle::measure(const MeasureRequest& request) {
  MeasureResponse failed;
  failed.id = request.id;
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(request.timeout_ms);
  const std::string line = request_to_json(request).dump() + "\n";
  std::size_t written = 0;
  while (written < line.size()) {
    const ssize_t n = write(to_child_, line.data() + written, line.size() - written);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) {
      failed.error = "renderer process not accepting input";
      stop();
      start();
      return failed;
    }
    written += static_cast<std::size_t>(n);
  }
  for (;;) {
    const std::optional<std::string> reply = read_line(deadline);
    if (!reply) {
      failed.error = "timeout";
      stop();
      start();
      return failed;
    }
    try {
      MeasureResponse resp = response_from_json(json::parse(*reply));
      // Stale answers from an earlier, abandoned request are skipped.
      if (resp.id != request.id) continue;
      return resp;
    } catch (const std::exception& e) {
      failed.error = std::string("malformed response: ") + e.what();
      return failed;
    }
  }
}

bool OracleCheckReport::passed() const {
  return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const OracleCheck& c) { return c.passed; });
}

OracleCheckReport oracle_check(GeometryOracle& oracle, std::size_t n_requests) {
  OracleCheckReport report;
  bool ids_ok = true;
  bool rects_ok = true;
  bool failures_ok = true;
  bool text_ok = true;
  bool latency_ok = true;
  std::string rect_detail;
  std::optional<Rect> first_text_box;

  for (std::size_t i = 0; i < n_requests; ++i) {
    MeasureRequest req;
    req.id = "check-" + std::to_string(i);
    const int kind = static_cast<int>(i % 4);
    const double x = 10 + static_cast<double>(i % 7) * 10;
    const double y = 20 + static_cast<double>(i % 5) * 10;
    if (kind == 0 || kind == 3) {
      req.svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"600\"><rect x=\"" + std::to_string(static_cast<int>(x)) +
                "\" y=\"" + std::to_string(static_cast<int>(y)) + "\" width=\"100\" height=\"50\"/></svg>";
    } else if (kind == 1) {
      req.svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"600\"><text x=\"100\" y=\"100\" font-size=\"16\">AB</text></svg>";
    } else {
      req.svg = "<svg><rect x=\"1\"";
    }
    const auto t0 = std::chrono::steady_clock::now();
    const MeasureResponse resp = oracle.measure(req);
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    report.max_latency_ms = std::max(report.max_latency_ms, ms);
    ++report.requests;
    if (ms >= req.timeout_ms) latency_ok = false;
    if (resp.id != req.id) ids_ok = false;
    if (kind == 0 || kind == 3) {
      const bool exact = resp.ok && !resp.elements.empty() && std::abs(resp.elements[0].bbox.x - x) <= 0.5 &&
                         std::abs(resp.elements[0].bbox.y - y) <= 0.5 && std::abs(resp.elements[0].bbox.w - 100) <= 0.5 &&
                         std::abs(resp.elements[0].bbox.h - 50) <= 0.5;
      if (!exact && rects_ok) rect_detail = "request " + req.id + (resp.ok ? " returned a wrong box" : " failed: " + resp.error);
      rects_ok = rects_ok && exact;
    } else if (kind == 1) {
      const std::optional<Rect> tb = resp.ok && !resp.elements.empty() ? resp.elements[0].text_bbox : std::nullopt;
      if (!tb || !(tb->w > 0)) {
        text_ok = false;
      } else if (!first_text_box) {
        first_text_box = tb;
      } else if (!(*tb == *first_text_box)) {
        text_ok = false;
      }
    } else if (resp.ok || resp.error.empty()) {
      failures_ok = false;
    }
  }
  report.checks.push_back({"matched ids", ids_ok, ""});
  report.checks.push_back({"rect boxes within 0.5 px", rects_ok, rect_detail});
  report.checks.push_back({"text boxes repeatable", text_ok, ""});
  report.checks.push_back({"truncated input reported as failure", failures_ok, ""});
  report.checks.push_back({"latency under timeout", latency_ok, "max " + std::to_string(report.max_latency_ms) + " ms"});
  return report;
}

}  // namespace geosvg
