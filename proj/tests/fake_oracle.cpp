// Line-protocol measurement service over the builtin engine.
//   --delay-ms N   sleep before answering every request
//   --hang-on S    never answer requests whose svg contains S
#include <chrono>
#include <cstring>
#include <iostream>
#include <string>
#include <thread>

#include "geosvg/errors.hpp"
#include "geosvg/render_oracle.hpp"

int main(int argc, char** argv) {
  int delay_ms = 0;
  std::string hang_on;
  for (int i = 1; i + 1 < argc; i += 2) {
    if (std::strcmp(argv[i], "--delay-ms") == 0) delay_ms = std::stoi(argv[i + 1]);
    if (std::strcmp(argv[i], "--hang-on") == 0) hang_on = argv[i + 1];
  }
  geosvg::BuiltinOracle engine;
  std::string line;
  while (std::getline(std::cin, line)) {
    geosvg::MeasureResponse resp;
    try {
      const nlohmann::json doc = nlohmann::json::parse(line);
      if (doc.is_object() && doc.contains("id") && doc["id"].is_string()) resp.id = doc["id"].get<std::string>();
      const geosvg::MeasureRequest req = geosvg::request_from_json(doc);
      if (!hang_on.empty() && req.svg.find(hang_on) != std::string::npos) {
        std::this_thread::sleep_for(std::chrono::hours(1));
      }
      if (delay_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
      resp = engine.measure(req);
    } catch (const std::exception& e) {
      resp.ok = false;
      resp.error = e.what();
    }
    std::cout << geosvg::response_to_json(resp).dump() << '\n' << std::flush;
  }
  return 0;
}
