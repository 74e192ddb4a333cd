#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "critbench/cfg.hpp"
#include "critbench/compression.hpp"
#include "critbench/hw_config.hpp"
#include "critbench/ilp.hpp"
#include "critbench/placement.hpp"
#include "critbench/program.hpp"
#include "json.hpp"

namespace critbench {

// ---------------------------------------------------------------- values

/// Register contents: exact constant, some address inside one memory region
/// (data symbol or the stack), or anything.
struct AbsValue {
  enum class Kind : std::uint8_t { Bottom, Const, Region, Top };
  Kind kind = Kind::Bottom;
  Word value = 0;   // Const
  int region = -1;  // Region

  static AbsValue constant(Word v) { return {Kind::Const, v, -1}; }
  static AbsValue in_region(int r) { return {Kind::Region, 0, r}; }
  static AbsValue top() { return {Kind::Top, 0, -1}; }
  friend bool operator==(const AbsValue&, const AbsValue&) = default;
};

using AbsRegs = std::array<AbsValue, kRegisterCount>;

/// Where a load or store may go.
struct DataTarget {
  enum class Kind : std::uint8_t { None, Exact, Region, Output, Unknown };
  Kind kind = Kind::None;
  Address address = 0;  // Exact
  int region = -1;      // Exact (containing region) and Region
};

/// Memory regions are the data symbols (by index) plus the stack, whose
/// index is program.data.size().
int region_of(const Program& p, Address a);
std::pair<Address, Address> region_range(const Program& p, int region);

struct ValueAnalysis {
  std::vector<std::optional<AbsRegs>> block_in;  // nullopt: unreachable
  std::vector<DataTarget> targets;                // per instruction
};

/// Interprocedural (context-insensitive) constant/region propagation over
/// the call/return supergraph. Arithmetic on a region pointer is assumed to
/// stay inside that region.
ValueAnalysis analyze_values(const Program& program);

// ---------------------------------------------------------------- caches

/// Must-analysis state: per set, line -> maximal age. Lines not listed may
/// be absent.
struct AbstractCacheState {
  std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> sets;

  explicit AbstractCacheState(std::uint32_t set_count = 0) : sets(set_count) {}
  std::optional<std::uint32_t> age_of(std::uint32_t line, std::uint32_t set) const;
  friend bool operator==(const AbstractCacheState&, const AbstractCacheState&) = default;
};

void must_access(AbstractCacheState& s, const CacheConfig& c, std::uint32_t line);
/// An access to an unknown line of `set`: everything there ages by one.
void must_age_set(AbstractCacheState& s, const CacheConfig& c, std::uint32_t set);
AbstractCacheState must_join(const AbstractCacheState& a, const AbstractCacheState& b);

/// A cache reference of one instruction as the analysis sees it.
struct AbstractAccess {
  enum class Kind : std::uint8_t { Line, Lines, Unknown };
  Kind kind = Kind::Line;
  std::vector<std::uint32_t> lines;  // one for Line, all candidates for Lines
};

/// Region over which a persistent line misses at most once per entry.
struct Scope {
  enum class Kind : std::uint8_t { Program, Function, Loop };
  Kind kind = Kind::Program;
  std::uint32_t id = 0;            // function or loop index
  std::vector<BlockId> blocks;      // including transitively called functions
  std::vector<BlockId> own_blocks;  // blocks of its own function inside the scope
  std::uint32_t depth = 0;          // loop nesting depth, 0 otherwise
  std::vector<EdgeId> entries;      // empty for the program scope
  bool at_start = false;            // entered once more when the program starts
};

/// Blocks reachable from the entry over all edges (calls and returns included).
std::vector<bool> reachable_blocks(const Program& program);

std::vector<Scope> build_scopes(const Program& program, const LoopForest& loops);

struct AccessClass {
  bool present = false;
  CacheClass cls = CacheClass::NotClassified;
  int scope = -1;                // Persistent only
  std::uint32_t line = 0;        // Persistent and AlwaysHit
};

struct CacheAnalysis {
  std::vector<AccessClass> classes;   // per instruction
  std::uint32_t iterations = 0;       // fixpoint block visits
};

/// Must analysis over the supergraph plus conflict-counting persistence per
/// scope (program, function, loops outer to inner; the outermost persistent
/// scope wins).
CacheAnalysis analyze_cache(const Program& program, const CacheConfig& config,
                            const std::vector<std::optional<AbstractAccess>>& accesses,
                            const std::vector<Scope>& scopes);

/// Instruction fetch address map: original addresses, or the compressed ones.
struct FetchMap {
  std::vector<Address> address;  // per instruction
  std::vector<bool> starts;      // instruction begins a fetched word
  std::vector<bool> encoded;     // fetched word is an encoding instruction
};

FetchMap fetch_map(const Program& program, const CompressionLayout* layout);

CacheAnalysis icache_analysis(const Program& program, const CacheConfig& config,
                              const FetchMap& fetch, const std::vector<Scope>& scopes);

enum class DataRoute : std::uint8_t { None, Output, Spm, Cache, Dram, Unknown };

struct DataAnalysis {
  std::vector<DataRoute> route;  // per instruction
  CacheAnalysis cache;           // classes for Cache routes (empty without a D-cache)
};

DataAnalysis dcache_analysis(const Program& program, const HardwareConfig& hw,
                             const PlacementMap* placement, const ValueAnalysis& values,
                             const std::vector<Scope>& scopes);

// ---------------------------------------------------------------- timing

/// Worst-case cycles of one block with persistent accesses counted as hits.
/// Uses the simulator's cost model with worst-case choices.
std::uint64_t block_time(const Program& program, BlockId block, const HardwareConfig& hw,
                         const FetchMap& fetch, const CacheAnalysis& icache,
                         const DataAnalysis& data);

/// Extra cycles charged per miss of a persistent line.
std::uint64_t persistent_miss_cost(const CacheConfig& c);

// ---------------------------------------------------------------- IPET

struct PersistentLine {
  bool icache = true;
  std::uint32_t line = 0;
  int scope = 0;
  std::uint64_t cost = 0;
  std::vector<BlockId> blocks;  // blocks holding accesses charged to this line
};

struct IpetModel {
  IlpModel ilp;
  std::vector<std::int64_t> edge_var;   // per edge, -1 if unreachable
  std::uint32_t source_var = 0;
  std::vector<std::uint32_t> sink_vars;
  std::vector<std::vector<std::uint32_t>> in_vars;  // per block
  std::vector<bool> reachable;                      // per block
  std::vector<std::uint32_t> m_vars;                // per persistent line
};

/// maximize sum t_b x_b + sum cost m; x_b = inflow = outflow; one unit of
/// flow from the entry; each call site returns as often as it calls; loop
/// back edges <= (bound - 1) * entries; m <= scope entries and m <= x of its
/// blocks. Throws Error("wcet", ...) for a reachable loop without a bound.
IpetModel build_ipet(const Program& program, const std::vector<std::uint64_t>& block_times,
                     const std::vector<PersistentLine>& persistent,
                     const std::vector<Scope>& scopes, const LoopForest& loops);

// ---------------------------------------------------------------- driver

struct WcetOptions {
  const PlacementMap* placement = nullptr;
  const CompressionLayout* compression = nullptr;
};

struct ClassStats {
  std::uint64_t always_hit = 0;
  std::uint64_t persistent = 0;
  std::uint64_t not_classified = 0;
};

struct WcetReport {
  std::uint64_t wcet = 0;
  std::vector<std::int64_t> block_counts;   // x_b at the optimum
  std::vector<std::uint64_t> block_times;   // t_b
  std::vector<Scope> scopes;
  CacheAnalysis icache;
  DataAnalysis data;
  std::vector<PersistentLine> persistent;
  ClassStats icache_stats, dcache_stats;
  std::uint64_t spm_accesses = 0;            // static sites routed to the SPM
  std::uint64_t ilp_variables = 0;
  std::uint64_t ilp_constraints = 0;
  std::uint64_t ilp_nodes = 0;
  std::string configuration;
};

WcetReport compute_wcet(const Program& program, const HardwareConfig& hw,
                        const WcetOptions& options = {});

/// Writes "icache_class"/"dcache_class" annotations on every classified
/// instruction.
void annotate_classes(Program& program, const WcetReport& report);

nlohmann::json to_json(const WcetReport& r);

}  // namespace critbench
