#include "vpfuzz/config.hpp"

#include <algorithm>
#include <sstream>

#include "vpfuzz/util.hpp"

namespace vpfuzz {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

[[noreturn]] void fail(int line, const std::string& msg) {
  throw ConfigError("config line " + std::to_string(line) + ": " + msg);
}

uint32_t addr_value(int line, const std::string& key, const std::string& v) {
  if (v.size() < 3 || v[0] != '0' || (v[1] != 'x' && v[1] != 'X'))
    fail(line, key + " must be a 0x-prefixed hex address, got '" + v + "'");
  try {
    return parse_addr(v);
  } catch (const ConfigError& e) {
    fail(line, e.what());
  }
}

uint64_t uint_value(int line, const std::string& key, const std::string& v) {
  try {
    return parse_number(v);
  } catch (const ConfigError&) {
    fail(line, key + " must be a number, got '" + v + "'");
  }
}

bool bool_value(int line, const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  fail(line, key + " must be true or false, got '" + v + "'");
}

std::vector<AddressRange> parse_ranges(int line, const std::string& v) {
  std::vector<AddressRange> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) fail(line, "empty range in tracked list");
    size_t dash = item.find('-');
    if (dash == std::string::npos)
      fail(line, "range must be start-end, got '" + item + "'");
    AddressRange r;
    r.start = addr_value(line, "tracked", trim(item.substr(0, dash)));
    r.end = addr_value(line, "tracked", trim(item.substr(dash + 1)));
    if (r.start > r.end)
      fail(line, "range start exceeds end in '" + item + "'");
    out.push_back(r);
  }
  return out;
}

}  // namespace

VpConfig parse_config_text(const std::string& text) {
  VpConfig cfg;
  bool have_crash_mode = false;
  bool crash_is_handler = false;
  bool have_main_return = false, have_handler = false;
  bool have_pentry = false, have_pexit = false, have_jump_only = false;
  uint32_t pentry = 0, pexit = 0;
  bool jump_only = false;

  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line = 0;
  while (std::getline(in, raw)) {
    line++;
    std::string s = raw;
    size_t hash = s.find('#');
    if (hash != std::string::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;

    if (s.front() == '[') {
      if (s.back() != ']') fail(line, "unterminated section header");
      section = s.substr(1, s.size() - 2);
      if (section != "guest" && section != "probe" && section != "crash" &&
          section != "persistent" && section != "fuzz")
        fail(line, "unknown section [" + section + "]");
      continue;
    }

    size_t eq = s.find('=');
    if (eq == std::string::npos) fail(line, "expected key = value");
    std::string key = trim(s.substr(0, eq));
    std::string value = trim(s.substr(eq + 1));
    if (section.empty()) fail(line, "key '" + key + "' outside any section");

    if (section == "guest") {
      if (key == "image") cfg.image_path = value;
      else if (key == "load_addr") cfg.load_addr = addr_value(line, key, value);
      else if (key == "entry_pc") cfg.entry_pc = addr_value(line, key, value);
      else if (key == "stack_top") cfg.stack_top = addr_value(line, key, value);
      else fail(line, "unknown key '" + key + "' in [guest]");
    } else if (section == "probe") {
      if (key == "tracked") cfg.tracked = parse_ranges(line, value);
      else if (key == "exhaustion_policy") {
        if (value == "end_run") cfg.exhaustion = ExhaustionPolicy::EndRun;
        else if (value == "zero_fill") cfg.exhaustion = ExhaustionPolicy::ZeroFill;
        else fail(line, "exhaustion_policy must be end_run or zero_fill");
      } else if (key == "write_policy") {
        if (value == "discard") cfg.write_policy = WritePolicy::Discard;
        else if (value == "shadow") cfg.write_policy = WritePolicy::StoreToShadow;
        else fail(line, "write_policy must be discard or shadow");
      } else fail(line, "unknown key '" + key + "' in [probe]");
    } else if (section == "crash") {
      if (key == "crash_mode") {
        if (value == "return_register") crash_is_handler = false;
        else if (value == "error_handler") crash_is_handler = true;
        else fail(line, "crash_mode must be return_register or error_handler");
        have_crash_mode = true;
      } else if (key == "main_return_pc") {
        cfg.main_return_pc = addr_value(line, key, value);
        have_main_return = true;
      } else if (key == "handler_pc") {
        cfg.handler_pc = addr_value(line, key, value);
        have_handler = true;
      } else fail(line, "unknown key '" + key + "' in [crash]");
    } else if (section == "persistent") {
      if (key == "persistent_entry") {
        pentry = addr_value(line, key, value);
        have_pentry = true;
      } else if (key == "persistent_exit") {
        pexit = addr_value(line, key, value);
        have_pexit = true;
      } else if (key == "jump_only") {
        jump_only = bool_value(line, key, value);
        have_jump_only = true;
      } else fail(line, "unknown key '" + key + "' in [persistent]");
    } else if (section == "fuzz") {
      if (key == "max_instructions")
        cfg.max_instructions = uint_value(line, key, value);
      else if (key == "timeout_ms")
        cfg.timeout_ms = static_cast<uint32_t>(uint_value(line, key, value));
      else if (key == "seed_dir") cfg.seed_dir = value;
      else if (key == "out_dir") cfg.out_dir = value;
      else if (key == "rng_seed") cfg.rng_seed = uint_value(line, key, value);
      else fail(line, "unknown key '" + key + "' in [fuzz]");
    }
  }

  if (!have_crash_mode)
    throw ConfigError("config: [crash] crash_mode is required");
  cfg.crash_mode = crash_is_handler ? CrashMode::ErrorHandler
                                    : CrashMode::ReturnRegister;
  if (cfg.crash_mode == CrashMode::ReturnRegister && !have_main_return)
    throw ConfigError("config: return_register mode requires main_return_pc");
  if (cfg.crash_mode == CrashMode::ErrorHandler && !have_handler)
    throw ConfigError("config: error_handler mode requires handler_pc");

  if (have_pentry || have_pexit || have_jump_only) {
    if (!have_pentry || !have_pexit)
      throw ConfigError(
          "config: [persistent] needs both persistent_entry and persistent_exit");
    cfg.persistent = PersistentRange{pentry, pexit, jump_only};
  }

  validate_config(cfg);
  return cfg;
}

VpConfig load_config_file(const std::string& path) {
  auto bytes = read_file_bytes(path);
  return parse_config_text(std::string(bytes.begin(), bytes.end()));
}

void validate_config(const VpConfig& cfg) {
  const uint64_t ram_end =
      static_cast<uint64_t>(kDefaultRamBase) + kDefaultRamSize;
  if (cfg.load_addr < kDefaultRamBase || cfg.load_addr >= ram_end)
    throw ConfigError("load_addr " + hex32(cfg.load_addr) + " outside memory");
  if (cfg.entry_pc % 4 != 0)
    throw ConfigError("entry_pc must be 4-byte aligned");
  if (cfg.entry_pc < kDefaultRamBase || cfg.entry_pc >= ram_end)
    throw ConfigError("entry_pc " + hex32(cfg.entry_pc) + " outside memory");
  if (cfg.stack_top <= kDefaultRamBase || cfg.stack_top > ram_end)
    throw ConfigError("stack_top " + hex32(cfg.stack_top) + " outside memory");

  auto sorted = cfg.tracked;
  std::sort(sorted.begin(), sorted.end(),
            [](const AddressRange& a, const AddressRange& b) {
              return a.start < b.start;
            });
  for (size_t i = 1; i < sorted.size(); i++)
    if (sorted[i].start <= sorted[i - 1].end)
      throw ConfigError("tracked ranges overlap: " + hex32(sorted[i - 1].start) +
                        "-" + hex32(sorted[i - 1].end) + " and " +
                        hex32(sorted[i].start) + "-" + hex32(sorted[i].end));

  if (cfg.persistent && cfg.persistent->entry_pc == cfg.persistent->exit_pc)
    throw ConfigError("persistent entry and exit must differ");
}

std::string serialize_config(const VpConfig& cfg) {
  std::ostringstream out;
  out << "[guest]\n";
  out << "image = " << cfg.image_path << "\n";
  out << "load_addr = " << hex32(cfg.load_addr) << "\n";
  out << "entry_pc = " << hex32(cfg.entry_pc) << "\n";
  out << "stack_top = " << hex32(cfg.stack_top) << "\n";
  out << "\n[probe]\n";
  if (!cfg.tracked.empty()) {
    out << "tracked = ";
    for (size_t i = 0; i < cfg.tracked.size(); i++) {
      if (i) out << ",";
      out << hex32(cfg.tracked[i].start) << "-" << hex32(cfg.tracked[i].end);
    }
    out << "\n";
  }
  out << "exhaustion_policy = "
      << (cfg.exhaustion == ExhaustionPolicy::EndRun ? "end_run" : "zero_fill")
      << "\n";
  out << "write_policy = "
      << (cfg.write_policy == WritePolicy::Discard ? "discard" : "shadow")
      << "\n";
  out << "\n[crash]\n";
  if (cfg.crash_mode == CrashMode::ReturnRegister) {
    out << "crash_mode = return_register\n";
    out << "main_return_pc = " << hex32(cfg.main_return_pc) << "\n";
  } else {
    out << "crash_mode = error_handler\n";
    out << "handler_pc = " << hex32(cfg.handler_pc) << "\n";
  }
  if (cfg.persistent) {
    out << "\n[persistent]\n";
    out << "persistent_entry = " << hex32(cfg.persistent->entry_pc) << "\n";
    out << "persistent_exit = " << hex32(cfg.persistent->exit_pc) << "\n";
    out << "jump_only = " << (cfg.persistent->jump_only ? "true" : "false")
        << "\n";
  }
  out << "\n[fuzz]\n";
  out << "max_instructions = " << cfg.max_instructions << "\n";
  out << "timeout_ms = " << cfg.timeout_ms << "\n";
  if (!cfg.seed_dir.empty()) out << "seed_dir = " << cfg.seed_dir << "\n";
  if (!cfg.out_dir.empty()) out << "out_dir = " << cfg.out_dir << "\n";
  out << "rng_seed = " << cfg.rng_seed << "\n";
  return out.str();
}

}  // namespace vpfuzz
