#include "popec/config_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

namespace popec {

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_vector(std::ostringstream& os, const std::string& key,
                  const std::vector<double>& values) {
  os << key << " =";
  for (double v : values) os << ' ' << format_double(v);
  os << '\n';
}

void write_vector(std::ostringstream& os, const std::string& key,
                  const std::vector<int>& values) {
  os << key << " =";
  for (int v : values) os << ' ' << v;
  os << '\n';
}

void write_matrix(std::ostringstream& os, const std::string& section,
                  const std::string& row_prefix,
                  const std::vector<double>& values, int rows, int cols) {
  os << '[' << section << "]\n";
  for (int r = 0; r < rows; ++r) {
    os << row_prefix << r << " =";
    for (int c = 0; c < cols; ++c)
      os << ' ' << format_double(values[r * cols + c]);
    os << '\n';
  }
  os << '\n';
}

using SectionMap = detail::SectionMap;

std::vector<double> parse_doubles(const std::string& text) {
  std::vector<double> out;
  std::istringstream is(text);
  double v;
  while (is >> v) out.push_back(v);
  return out;
}

std::vector<int> parse_ints(const std::string& text) {
  std::vector<int> out;
  std::istringstream is(text);
  int v;
  while (is >> v) out.push_back(v);
  return out;
}

const std::string& require_key(const SectionMap& sections,
                               const std::string& section,
                               const std::string& key) {
  const auto sit = sections.find(section);
  if (sit == sections.end())
    throw ConfigError("config: missing section [" + section + "]");
  const auto kit = sit->second.find(key);
  if (kit == sit->second.end())
    throw ConfigError("config: missing key '" + key + "' in [" + section +
                      "]");
  return kit->second;
}

std::vector<double> read_matrix(const SectionMap& sections,
                                const std::string& section,
                                const std::string& row_prefix, int rows,
                                int cols) {
  std::vector<double> out(static_cast<std::size_t>(rows) * cols);
  for (int r = 0; r < rows; ++r) {
    const std::vector<double> row =
        parse_doubles(require_key(sections, section, row_prefix +
                                                         std::to_string(r)));
    if (static_cast<int>(row.size()) != cols)
      throw ConfigError("config: [" + section + "] row " + std::to_string(r) +
                        " needs " + std::to_string(cols) + " values");
    for (int c = 0; c < cols; ++c) out[r * cols + c] = row[c];
  }
  return out;
}

}  // namespace

namespace detail {

SectionMap parse_key_value_sections(const std::string& text) {
  SectionMap sections;
  std::istringstream is(text);
  std::string line, current;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config line " + std::to_string(line_no) +
                          ": malformed section header");
      current = line.substr(1, line.size() - 2);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected key = value");
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    auto trim = [](std::string& s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t");
      s = b == std::string::npos ? "" : s.substr(b, e - b + 1);
    };
    trim(key);
    trim(value);
    sections[current][key] = value;
  }
  return sections;
}

}  // namespace detail

std::string instance_to_config(const SystemInstance& inst) {
  std::ostringstream os;
  os << "[system]\n";
  os << "num_users = " << inst.num_users << '\n';
  os << "num_servers = " << inst.num_servers << '\n';
  os << "num_channels = " << inst.num_channels << '\n';
  os << "num_classes = " << inst.num_classes << '\n';
  os << "packet_size = " << format_double(inst.packet_size) << '\n';
  os << "confidence_alpha = " << format_double(inst.confidence_alpha) << '\n';
  os << "confidence_beta = " << format_double(inst.confidence_beta) << '\n';
  os << '\n';

  os << "[users]\n";
  write_vector(os, "user_server", inst.user_server);
  write_vector(os, "user_class", inst.user_class);
  write_vector(os, "arrival_rate", inst.arrival_rate);
  os << '\n';

  os << "[channels]\n";
  write_vector(os, "channel_bandwidth", inst.channel_bandwidth);
  write_vector(os, "channel_snr", inst.channel_snr);
  write_vector(os, "channel_capacity", inst.channel_capacity);
  os << '\n';

  os << "[servers]\n";
  write_vector(os, "server_capacity", inst.server_capacity);
  os << '\n';

  write_matrix(os, "success_prob", "user", inst.success_prob, inst.num_users,
               inst.num_channels);
  write_matrix(os, "service_mean_inv", "user", inst.service_mean_inv,
               inst.num_users, inst.num_servers);
  write_matrix(os, "service_second_moment", "user", inst.service_second_moment,
               inst.num_users, inst.num_servers);
  write_matrix(os, "hop_delay", "user", inst.hop_delay, inst.num_users,
               inst.num_channels);
  write_matrix(os, "inter_server_delay", "server", inst.inter_server_delay,
               inst.num_servers, inst.num_servers);
  return os.str();
}

SystemInstance instance_from_config(const std::string& text) {
  const SectionMap sections = detail::parse_key_value_sections(text);
  SystemInstance inst;

  auto system_value = [&](const std::string& key) {
    const std::vector<double> v =
        parse_doubles(require_key(sections, "system", key));
    if (v.size() != 1)
      throw ConfigError("config: [system] " + key + " must be one value");
    return v[0];
  };

  inst.num_users = static_cast<int>(system_value("num_users"));
  inst.num_servers = static_cast<int>(system_value("num_servers"));
  inst.num_channels = static_cast<int>(system_value("num_channels"));
  inst.num_classes = static_cast<int>(system_value("num_classes"));
  if (inst.num_users <= 0 || inst.num_servers <= 0 || inst.num_channels <= 0 ||
      inst.num_classes <= 0)
    throw ConfigError("config: [system] counts must be positive");
  inst.packet_size = system_value("packet_size");
  inst.confidence_alpha = system_value("confidence_alpha");
  inst.confidence_beta = system_value("confidence_beta");

  inst.user_server = parse_ints(require_key(sections, "users", "user_server"));
  inst.user_class = parse_ints(require_key(sections, "users", "user_class"));
  inst.arrival_rate =
      parse_doubles(require_key(sections, "users", "arrival_rate"));

  inst.channel_bandwidth =
      parse_doubles(require_key(sections, "channels", "channel_bandwidth"));
  inst.channel_snr =
      parse_doubles(require_key(sections, "channels", "channel_snr"));
  inst.channel_capacity =
      parse_doubles(require_key(sections, "channels", "channel_capacity"));
  inst.server_capacity =
      parse_doubles(require_key(sections, "servers", "server_capacity"));

  inst.success_prob = read_matrix(sections, "success_prob", "user",
                                  inst.num_users, inst.num_channels);
  inst.service_mean_inv = read_matrix(sections, "service_mean_inv", "user",
                                      inst.num_users, inst.num_servers);
  inst.service_second_moment =
      read_matrix(sections, "service_second_moment", "user", inst.num_users,
                  inst.num_servers);
  inst.hop_delay = read_matrix(sections, "hop_delay", "user", inst.num_users,
                               inst.num_channels);
  inst.inter_server_delay = read_matrix(sections, "inter_server_delay",
                                        "server", inst.num_servers,
                                        inst.num_servers);
  return inst;
}

SystemInstance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read instance config: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return instance_from_config(buffer.str());
}

void save_instance(const SystemInstance& inst, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write instance config: " + path);
  out << instance_to_config(inst);
}

}  // namespace popec
