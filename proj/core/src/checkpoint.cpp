#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "gea/error.hpp"
#include "gea/evolution.hpp"

namespace gea {

using nlohmann::json;

std::string dump_checkpoint(const Population& pop) {
  const SpaceDescriptor space;
  json doc;
  doc["space"] = {{"nodes", space.num_nodes}, {"ops", space.op_names}};
  json list = json::array();
  for (const Individual& ind : pop) {
    json entry = {{"arch", encode_str(ind.arch)},
                  {"fitness", ind.fitness ? json(*ind.fitness) : json(nullptr)},
                  {"birth_index", ind.birth_index}};
    if (!ind.proxy) {
      entry["proxy"] = nullptr;
    } else if (ind.proxy->is_sentinel()) {
      entry["proxy"] = "sentinel";
    } else {
      entry["proxy"] = ind.proxy->value();
      entry["proxy_per_class"] = ind.proxy->per_class();
    }
    list.push_back(std::move(entry));
  }
  doc["individuals"] = std::move(list);
  return doc.dump(1) + "\n";
}

void save_checkpoint(const Population& pop, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(fmt::format("cannot write checkpoint '{}'", path.string()));
  out << dump_checkpoint(pop);
  if (!out) throw IoError(fmt::format("write failed for '{}'", path.string()));
}

Population parse_checkpoint(const std::string& text, const SpaceDescriptor& space) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("checkpoint JSON parse error at byte {}: {}", e.byte, e.what()),
                     e.byte);
  }
  Population pop;
  try {
    SpaceDescriptor found;
    found.num_nodes = doc.at("space").at("nodes").get<std::size_t>();
    found.op_names = doc.at("space").at("ops").get<std::vector<std::string>>();
    if (found != space) throw FormatError("checkpoint space does not match the target space", 0);
    const json& list = doc.at("individuals");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const json& e = list[i];
      Individual ind;
      ind.arch = decode_str(e.at("arch").get<std::string>());
      if (!e.at("fitness").is_null()) ind.fitness = e.at("fitness").get<double>();
      ind.birth_index = e.at("birth_index").get<std::uint64_t>();
      const json& proxy = e.at("proxy");
      if (proxy.is_string()) {
        if (proxy.get<std::string>() != "sentinel") {
          throw FormatError(fmt::format("individual {}: unknown proxy marker", i), i);
        }
        ind.proxy = ProxyScore::worst();
      } else if (!proxy.is_null()) {
        std::vector<double> per_class;
        if (e.contains("proxy_per_class")) per_class = e.at("proxy_per_class").get<std::vector<double>>();
        ind.proxy = ProxyScore(proxy.get<double>(), std::move(per_class));
      }
      if (!pop.empty() && ind.birth_index <= pop.back().birth_index) {
        throw FormatError(fmt::format("individual {}: birth_index not increasing", i), i);
      }
      pop.push_back(std::move(ind));
    }
  } catch (const json::exception& e) {
    throw ParseError(fmt::format("checkpoint malformed: {}", e.what()), 0);
  }
  return pop;
}

Population load_checkpoint(const std::filesystem::path& path, const SpaceDescriptor& space) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open checkpoint '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_checkpoint(ss.str(), space);
}

}  // namespace gea
