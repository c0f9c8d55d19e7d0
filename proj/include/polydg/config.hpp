#ifndef POLYDG_CONFIG_HPP
#define POLYDG_CONFIG_HPP

/// Line-oriented "key = value" configuration files with [section]
/// headers, '#' comments, typed accessors with defaults, and an echo of
/// the effective configuration for reproducibility.

#include <polydg/types.hpp>

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace polydg
{
  class Config
  {
  public:
    Config() = default;

    /// Parses a config file. Throws parse_error with the line number on
    /// malformed lines.
    static Config from_file(const std::string &path)
    {
      std::ifstream in(path);
      if (!in)
        throw parse_error("cannot open config file '" + path + "'", 0);
      return from_stream(in);
    }

    static Config from_stream(std::istream &in)
    {
      Config      cfg;
      std::string line, section;
      int         line_no = 0;
      while (std::getline(in, line))
        {
          ++line_no;
          const auto hash = line.find('#');
          if (hash != std::string::npos)
            line.erase(hash);
          const std::string trimmed = trim(line);
          if (trimmed.empty())
            continue;
          if (trimmed.front() == '[')
            {
              if (trimmed.back() != ']' || trimmed.size() < 3)
                throw parse_error("malformed section header", line_no);
              section = trim(trimmed.substr(1, trimmed.size() - 2));
              continue;
            }
          const auto eq = trimmed.find('=');
          if (eq == std::string::npos)
            throw parse_error("expected 'key = value'", line_no);
          const std::string key = trim(trimmed.substr(0, eq));
          const std::string val = trim(trimmed.substr(eq + 1));
          if (key.empty())
            throw parse_error("empty key", line_no);
          const std::string full = section.empty() ? key : section + "." + key;
          if (cfg.values.count(full))
            throw parse_error("duplicate key '" + full + "'", line_no);
          cfg.values[full] = val;
        }
      return cfg;
    }

    bool has(const std::string &key) const { return values.count(key) > 0; }

    /// Overrides or adds a value programmatically (CLI flags).
    void set(const std::string &key, const std::string &value)
    {
      values[key] = value;
    }

    std::string get_string(const std::string &key,
                           const std::string &fallback) const
    {
      const auto it = values.find(key);
      const std::string v = it == values.end() ? fallback : it->second;
      note(key, v);
      return v;
    }

    Real get_real(const std::string &key, Real fallback) const
    {
      const auto it = values.find(key);
      if (it == values.end())
        {
          note(key, format_real(fallback));
          return fallback;
        }
      note(key, it->second);
      return parse_real(key, it->second);
    }

    int get_int(const std::string &key, int fallback) const
    {
      return static_cast<int>(get_int64(key, fallback));
    }

    int64_t get_int64(const std::string &key, int64_t fallback) const
    {
      const auto it = values.find(key);
      if (it == values.end())
        {
          note(key, std::to_string(fallback));
          return fallback;
        }
      note(key, it->second);
      try
        {
          std::size_t pos = 0;
          const int64_t v = std::stoll(it->second, &pos);
          if (pos != it->second.size())
            throw std::invalid_argument("");
          return v;
        }
      catch (const std::exception &)
        {
          throw std::invalid_argument("config key '" + key +
                                      "' is not an integer: " + it->second);
        }
    }

    bool get_bool(const std::string &key, bool fallback) const
    {
      const auto it = values.find(key);
      if (it == values.end())
        {
          note(key, fallback ? "true" : "false");
          return fallback;
        }
      note(key, it->second);
      if (it->second == "true" || it->second == "1" || it->second == "yes")
        return true;
      if (it->second == "false" || it->second == "0" || it->second == "no")
        return false;
      throw std::invalid_argument("config key '" + key +
                                  "' is not a boolean: " + it->second);
    }

    std::vector<Real> get_reals(const std::string        &key,
                                const std::vector<Real> &fallback) const
    {
      const auto it = values.find(key);
      if (it == values.end())
        {
          std::string joined;
          for (Real v : fallback)
            joined += (joined.empty() ? "" : " ") + format_real(v);
          note(key, joined);
          return fallback;
        }
      note(key, it->second);
      std::vector<Real>  out;
      std::istringstream ss(it->second);
      std::string        tok;
      while (ss >> tok)
        out.push_back(parse_real(key, tok));
      if (out.empty())
        throw std::invalid_argument("config key '" + key + "' is empty");
      return out;
    }

    std::vector<int> get_ints(const std::string      &key,
                              const std::vector<int> &fallback) const
    {
      std::vector<Real> defaults;
      for (int v : fallback)
        defaults.push_back(static_cast<Real>(v));
      std::vector<int> out;
      for (Real v : get_reals(key, defaults))
        out.push_back(static_cast<int>(v));
      return out;
    }

    /// Keys present in the file but never read by any accessor.
    std::vector<std::string> unused_keys() const
    {
      std::vector<std::string> unused;
      for (const auto &[k, v] : values)
        if (!effective.count(k))
          unused.push_back(k);
      return unused;
    }

    /// Throws when the file contains keys no accessor consumed,
    /// catching option typos before a long run.
    void reject_unused() const
    {
      const auto unused = unused_keys();
      if (unused.empty())
        return;
      std::string msg = "unknown config keys:";
      for (const auto &k : unused)
        msg += " " + k;
      throw std::invalid_argument(msg);
    }

    /// Writes every consumed key with its effective value, grouped by
    /// section in sorted order.
    void echo(std::ostream &out) const
    {
      std::string section;
      for (const auto &[key, val] : effective)
        {
          const auto  dot = key.find('.');
          std::string sec = dot == std::string::npos ? "" : key.substr(0, dot);
          const std::string name =
            dot == std::string::npos ? key : key.substr(dot + 1);
          if (sec != section)
            {
              out << "[" << sec << "]\n";
              section = sec;
            }
          out << name << " = " << val << "\n";
        }
    }

  private:
    static std::string trim(const std::string &s)
    {
      const auto a = s.find_first_not_of(" \t\r\n");
      if (a == std::string::npos)
        return "";
      const auto b = s.find_last_not_of(" \t\r\n");
      return s.substr(a, b - a + 1);
    }

    static Real parse_real(const std::string &key, const std::string &s)
    {
      try
        {
          std::size_t pos = 0;
          const Real  v   = std::stod(s, &pos);
          if (pos != s.size())
            throw std::invalid_argument("");
          return v;
        }
      catch (const std::exception &)
        {
          throw std::invalid_argument("config key '" + key +
                                      "' is not a number: " + s);
        }
    }

    static std::string format_real(Real v)
    {
      std::ostringstream ss;
      ss.precision(15);
      ss << v;
      return ss.str();
    }

    void note(const std::string &key, const std::string &val) const
    {
      effective[key] = val;
    }

    std::map<std::string, std::string>         values;
    mutable std::map<std::string, std::string> effective;
  };
} // namespace polydg

#endif // POLYDG_CONFIG_HPP
