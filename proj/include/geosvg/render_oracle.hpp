#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "geosvg/geometry.hpp"
#include "geosvg/svg_scene.hpp"

namespace geosvg {

// Wire types of the external measurement service (newline-delimited JSON, version "v1").
struct MeasureRequest {
  std::string id;
  std::string svg;
  double width = 800;
  double height = 600;
  int timeout_ms = 5000;
};

struct MeasuredElement {
  std::size_t index = 0;  // position in document order, same numbering as SvgScene::elements
  std::string kind;
  Rect bbox;
  std::optional<Rect> text_bbox;
};

struct MeasureResponse {
  std::string version = "v1";
  std::string id;
  bool ok = false;
  std::vector<MeasuredElement> elements;
  std::string error;
  std::string font_family;
};

nlohmann::json request_to_json(const MeasureRequest& r);
MeasureRequest request_from_json(const nlohmann::json& doc);
nlohmann::json response_to_json(const MeasureResponse& r);
// Throws FormatError on schema violations.
MeasureResponse response_from_json(const nlohmann::json& doc);

class GeometryOracle {
 public:
  virtual ~GeometryOracle() = default;
  // Never throws for render failures; those come back as ok == false.
  virtual MeasureResponse measure(const MeasureRequest& request) = 0;
};

// Answers requests with the builtin geometry engine. Used for protocol self-tests and as the
// reference implementation of the response schema.
class BuiltinOracle final : public GeometryOracle {
 public:
  MeasureResponse measure(const MeasureRequest& request) override;
};

// Talks to an external process over stdin/stdout, one request in flight. A request that
// exceeds its timeout yields ok == false with error "timeout" and the process is restarted.
class ProcessOracle final : public GeometryOracle {
 public:
  explicit ProcessOracle(std::string command);
  ~ProcessOracle() override;
  ProcessOracle(const ProcessOracle&) = delete;
  ProcessOracle& operator=(const ProcessOracle&) = delete;

  MeasureResponse measure(const MeasureRequest& request) override;

 private:
  void start();
  void stop();
  std::optional<std::string> read_line(std::chrono::steady_clock::time_point deadline);

  std::string command_;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
};

// Replaces builtin boxes with measured ones. Returns false (with a reason) when the response
// does not line up with the scene's elements.
bool apply_measurement(SvgScene& scene, const MeasureResponse& response, std::string* reason = nullptr);

struct OracleCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct OracleCheckReport {
  std::vector<OracleCheck> checks;
  std::size_t requests = 0;
  double max_latency_ms = 0.0;
  bool passed() const;
};

// Protocol self-test: matched ids, exact rect boxes (0.5 px), repeatable text boxes, failure
// reporting for truncated input and every latency under the request timeout.
OracleCheckReport oracle_check(GeometryOracle& oracle, std::size_t n_requests = 100);

}  // namespace geosvg
