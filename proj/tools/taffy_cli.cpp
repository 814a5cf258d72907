// Command-line front end for the taffy filter library: build filters from key
// files, query saved filters, and run growth benchmarks to CSV.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "taffy/taffy.hpp"

namespace {

struct BuildOptions {
  std::string type;
  std::string input;
  std::string format = "hex";
  std::string output;
  double fpp = 0.004;
  bool fpp_set = false;
  bool freeze = false;
  uint64_t seed = 0;
};

struct QueryOptions {
  std::string filter_path;
  std::string input;
  std::string format = "hex";
};

struct BenchOptions {
  std::string type;
  uint64_t n = 1000000;
  uint64_t probes = 100000;
  uint64_t seed = 0;
  std::string csv;
};

template <class Filter>
taffy::AnyFilter build_into(Filter filter, std::istream& keys,
                            taffy::KeyFormat format, bool freeze,
                            uint64_t& count) {
  count = taffy::for_each_key(keys, format,
                              [&filter](uint64_t key) { filter.insert(key); });
  if constexpr (std::is_same_v<Filter, taffy::TaffyBlockFilter>) {
    return filter;
  } else {
    if (freeze) return filter.freeze();
    return filter;
  }
}

int run_build(const BuildOptions& opt) {
  std::ifstream in(opt.input, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot open input " << opt.input << '\n';
    return 1;
  }
  const taffy::KeyFormat format = taffy::parse_key_format(opt.format);
  uint64_t count = 0;
  taffy::AnyFilter built = [&]() -> taffy::AnyFilter {
    if (opt.type == "tbf") {
      return build_into(taffy::TaffyBlockFilter(opt.fpp, opt.seed), in, format,
                        false, count);
    }
    if (opt.type == "tcf") {
      return build_into(taffy::TaffyCuckooFilter(opt.seed), in, format,
                        opt.freeze, count);
    }
    return build_into(taffy::MinimalTaffyCuckooFilter(opt.seed), in, format,
                      opt.freeze, count);
  }();

  std::ofstream out(opt.output, std::ios::binary | std::ios::trunc);
  if (!out) {
    std::cerr << "error: cannot open output " << opt.output << '\n';
    return 1;
  }
  taffy::save(built, out);
  out.flush();
  if (!out) {
    std::cerr << "error: write failed on " << opt.output << '\n';
    return 1;
  }
  const auto bytes = static_cast<uint64_t>(out.tellp());
  char summary[128];
  std::snprintf(summary, sizeof(summary), "keys=%llu bytes=%llu bits_per_key=%.3f\n",
                static_cast<unsigned long long>(count),
                static_cast<unsigned long long>(bytes),
                count == 0 ? 0.0
                           : 8.0 * static_cast<double>(bytes) /
                                 static_cast<double>(count));
  std::cout << summary;
  return 0;
}

int run_query(const QueryOptions& opt) {
  std::ifstream filter_in(opt.filter_path, std::ios::binary);
  if (!filter_in) {
    std::cerr << "error: cannot open filter " << opt.filter_path << '\n';
    return 1;
  }
  const taffy::AnyFilter filter = taffy::load(filter_in);
  std::ifstream in(opt.input, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot open input " << opt.input << '\n';
    return 1;
  }
  taffy::for_each_key(in, taffy::parse_key_format(opt.format),
                      [&filter](uint64_t key) {
                        std::cout
                            << (taffy::any_contains(filter, key) ? "true"
                                                                 : "false")
                            << '\n';
                      });
  return 0;
}

int run_bench(const BenchOptions& opt) {
  std::vector<taffy::BenchRecord> rows;
  if (opt.type == "tbf") {
    taffy::TaffyBlockFilter f(0.004, opt.seed);
    rows = taffy::run_growth_bench(f, opt.n, opt.probes, opt.seed);
  } else if (opt.type == "tcf") {
    taffy::TaffyCuckooFilter f(opt.seed);
    rows = taffy::run_growth_bench(f, opt.n, opt.probes, opt.seed);
  } else {
    taffy::MinimalTaffyCuckooFilter f(opt.seed);
    rows = taffy::run_growth_bench(f, opt.n, opt.probes, opt.seed);
  }
  if (opt.csv.empty()) {
    taffy::write_csv(std::cout, rows);
    return 0;
  }
  std::ofstream out(opt.csv, std::ios::trunc);
  if (!out) {
    std::cerr << "error: cannot open csv output " << opt.csv << '\n';
    return 1;
  }
  taffy::write_csv(out, rows);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Growable approximate-membership filters"};
  app.require_subcommand(1);

  BuildOptions build;
  CLI::App* cmd_build =
      app.add_subcommand("build", "Build a filter from a key file");
  cmd_build->add_option("--type", build.type, "Filter type")
      ->required()
      ->check(CLI::IsMember({"tbf", "tcf", "mtcf"}));
  cmd_build->add_option("--input", build.input, "Key file")->required();
  cmd_build->add_option("--format", build.format, "Key format")
      ->check(CLI::IsMember({"hex", "dec64", "raw64"}));
  cmd_build->add_option("--fpp", build.fpp, "False positive budget (tbf only)")
      ->check(CLI::Range(1e-9, 0.999999));
  cmd_build->add_flag("--freeze", build.freeze,
                      "Freeze before saving (tcf/mtcf only)");
  cmd_build->add_option("--seed", build.seed, "Filter seed");
  cmd_build->add_option("--output", build.output, "Output filter file")
      ->required();

  QueryOptions query;
  CLI::App* cmd_query =
      app.add_subcommand("query", "Query a saved filter with a key file");
  cmd_query->add_option("filter", query.filter_path, "Saved filter file")
      ->required();
  cmd_query->add_option("--input", query.input, "Key file")->required();
  cmd_query->add_option("--format", query.format, "Key format")
      ->check(CLI::IsMember({"hex", "dec64", "raw64"}));

  BenchOptions bench;
  CLI::App* cmd_bench =
      app.add_subcommand("bench", "Growth benchmark over random keys");
  cmd_bench->add_option("--type", bench.type, "Filter type")
      ->required()
      ->check(CLI::IsMember({"tbf", "tcf", "mtcf"}));
  cmd_bench->add_option("--n", bench.n, "Total inserts");
  cmd_bench->add_option("--probes", bench.probes, "Probes per checkpoint");
  cmd_bench->add_option("--seed", bench.seed, "Benchmark seed");
  cmd_bench->add_option("--csv", bench.csv, "CSV output path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_build->parsed()) {
      build.fpp_set = cmd_build->count("--fpp") > 0;
      if (build.fpp_set && build.type != "tbf") {
        std::cerr << "error: --fpp applies only to --type tbf\n";
        return 2;
      }
      if (build.freeze && build.type == "tbf") {
        std::cerr << "error: --freeze applies only to cuckoo filter types\n";
        return 2;
      }
      return run_build(build);
    }
    if (cmd_query->parsed()) return run_query(query);
    if (cmd_bench->parsed()) {
      if (bench.n < 1) {
        std::cerr << "error: --n must be at least 1\n";
        return 2;
      }
      return run_bench(bench);
    }
  } catch (const taffy::KeyParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const taffy::SerializeError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
