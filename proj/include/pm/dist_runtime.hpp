#pragma once

// Distributed-memory interpreter over simulated processes, one per cell.
// A transition is copy -> step -> dist -> collect. Copy and collect run as
// 3^d checkerboard phases; in phase k only the processes gamma(k, .) read,
// and they read only from their beta neighbors. Data moves between storages
// exclusively through immutable snapshots published before each stage, so a
// worker touches no storage but its own.

#include <cstdint>
#include <algorithm>
#include <memory>
#include <optional>
#include <ostream>
#include <utility>
#include <string>
#include <vector>

#include "pm/cell_grid.hpp"
#include "pm/core.hpp"
#include "pm/executor.hpp"
#include "pm/index_space.hpp"

namespace pm {

enum class CommKind { Copy, Collect };

inline const char* to_string(CommKind k) { return k == CommKind::Copy ? "copy" : "collect"; }

struct CommEvent {
  std::int64_t phase = 0;   // running phase counter over the whole run
  std::int64_t k = 0;       // checkerboard pattern
  std::int64_t reader = 0;  // active process
  std::int64_t target = 0;  // process it reads from
  CommKind kind = CommKind::Copy;
  std::size_t payload_size = 0;

  friend bool operator==(const CommEvent&, const CommEvent&) = default;
};

struct CommLog {
  std::vector<CommEvent> events;
  std::int64_t next_phase = 1;
};

inline void write_audit_csv(std::ostream& os, const std::vector<CommEvent>& events) {
  os << "phase,k,reader,target,kind,payload_size\n";
  for (const CommEvent& e : events)
    os << e.phase << ',' << e.k << ',' << e.reader << ',' << e.target << ',' << to_string(e.kind) << ','
       << e.payload_size << '\n';
}

// ---------------------------------------------------------------------------
// audit

struct AuditViolation {
  std::int64_t phase = 0;
  std::int64_t k = 0;
  CommKind kind = CommKind::Copy;
  std::string what;
};

struct AuditReport {
  std::size_t events = 0;
  std::size_t phases = 0;
  std::vector<AuditViolation> violations;

  bool ok() const { return violations.empty(); }
};

/// Within each phase: no target is read by two distinct readers, and no
/// reader is read by another reader.
inline AuditReport audit_communications(const std::vector<CommEvent>& events) {
  AuditReport rep;
  rep.events = events.size();
  std::vector<const CommEvent*> order;
  order.reserve(events.size());
  for (const CommEvent& e : events) order.push_back(&e);
  std::stable_sort(order.begin(), order.end(), [](const CommEvent* a, const CommEvent* b) { return a->phase < b->phase; });

  std::vector<std::int64_t> readers;
  std::vector<std::pair<std::int64_t, std::int64_t>> reads;  // (target, reader)
  for (std::size_t lo = 0; lo < order.size();) {
    std::size_t hi = lo;
    while (hi < order.size() && order[hi]->phase == order[lo]->phase) ++hi;
    ++rep.phases;
    const CommEvent& first = *order[lo];
    readers.clear();
    reads.clear();
    for (std::size_t i = lo; i < hi; ++i) {
      readers.push_back(order[i]->reader);
      reads.emplace_back(order[i]->target, order[i]->reader);
    }
    std::sort(readers.begin(), readers.end());
    readers.erase(std::unique(readers.begin(), readers.end()), readers.end());
    std::sort(reads.begin(), reads.end());
    reads.erase(std::unique(reads.begin(), reads.end()), reads.end());
    for (std::size_t i = 0; i < reads.size();) {
      std::size_t k = i;
      std::string who;
      while (k < reads.size() && reads[k].first == reads[i].first) {
        who += (who.empty() ? "" : ",") + std::to_string(reads[k].second);
        ++k;
      }
      if (k - i > 1)
        rep.violations.push_back({first.phase, first.k, first.kind,
                                  "readers " + who + " share target " + std::to_string(reads[i].first)});
      i = k;
    }
    for (std::size_t i = lo; i < hi; ++i) {
      const CommEvent& e = *order[i];
      if (e.target != e.reader && std::binary_search(readers.begin(), readers.end(), e.target))
        rep.violations.push_back({e.phase, e.k, e.kind,
                                  "reader " + std::to_string(e.reader) + " targets active reader " +
                                      std::to_string(e.target)});
    }
    lo = hi;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// local interaction

/// Interacts every particle of the center compartment with the generated
/// neighborhood over the concatenation of all compartments. Partners are
/// read from the unmodified storage. Returns the new center compartment.
inline Compartment interact_center(const ProcessStorage& storage, const GlobalVar& g, const AlgorithmSpec& spec) {
  const Compartment& center = storage.center();
  Compartment out;
  out.reserve(center.size());
  for (const Particle& pj : center) {
    Particle acc = pj;
    for (const Compartment& comp : storage.compartments)
      for (const Particle& pk : comp)
        if (within_cutoff(pk.x, pj.x, spec.cutoff) && spec.omega(g, pk, pj)) acc = spec.interact(g, acc, pk);
    out.push_back(std::move(acc));
  }
  return out;
}

inline ProcessStorage local_interaction(const ProcessStorage& storage, const GlobalVar& g, const AlgorithmSpec& spec) {
  ProcessStorage out = storage;
  out.center() = interact_center(storage, g, spec);
  return out;
}

// ---------------------------------------------------------------------------
// runtime

struct ParallelRunOptions {
  std::int64_t max_steps = 10'000'000;
  bool keep_log = false;
  bool keep_trace = false;  // gathered centers of every visited state
};

struct ParallelRunResult {
  DistributedState final;
  std::int64_t T = 1;
  CommLog log;
  std::vector<State> trace;
};

template <class Topology = CheckerboardTopology>
class DistributedRuntime {
 public:
  DistributedRuntime(AlgorithmSpec spec, CellGrid grid, ExecMode mode = ExecMode::ReferenceSequentialPhases,
                     unsigned workers = 0)
      : DistributedRuntime(std::move(spec), grid, Topology(grid.dims), mode, workers) {}

  DistributedRuntime(AlgorithmSpec spec, CellGrid grid, Topology topology, ExecMode mode, unsigned workers = 0)
      : spec_(std::move(spec)), grid_(std::move(grid)), topo_(std::move(topology)), exec_(mode, workers) {
    if (!(topo_.dims() == grid_.dims)) throw UsageError("topology does not match the cell grid");
    for (std::int64_t l = 1; l <= pow3(grid_.d()); ++l) mirror_.push_back(mirror_compartment(l, grid_.d()));
  }

  const AlgorithmSpec& spec() const { return spec_; }
  const CellGrid& grid() const { return grid_; }
  const Topology& topology() const { return topo_; }
  ExecMode mode() const { return exec_.mode(); }

  /// Every active reader fills compartment l with the center of beta(w, l).
  DistributedState copy_all(DistributedState s, CommLog* log = nullptr) const {
    check_shape(s);
    const std::int64_t nk = topo_.compartments();
    const std::int64_t c = grid_.center();
    // centers never change during copy; publish them once
    std::vector<std::shared_ptr<const Compartment>> centers(s.storages.size());
    exec_.for_each(static_cast<std::int64_t>(s.storages.size()), [&](std::int64_t i) {
      centers[static_cast<std::size_t>(i)] = std::make_shared<const Compartment>(s.storages[static_cast<std::size_t>(i)].center());
    });
    for (std::int64_t k = 1; k <= nk; ++k) {
      const std::int64_t active = topo_.pattern_size(k);
      std::vector<std::vector<CommEvent>> events(static_cast<std::size_t>(active));
      exec_.for_each(active, [&](std::int64_t j0) {
        const std::int64_t w = topo_.active(k, j0 + 1);
        ProcessStorage& own = s.storage(w);
        for (std::int64_t l = 1; l <= nk; ++l) {
          if (l == c) continue;  // own center, identity
          const std::optional<std::int64_t> t = topo_.neighbor(w, l);
          if (!t) continue;
          const Compartment& msg = *centers.at(static_cast<std::size_t>(*t - 1));
          own.at(l) = msg;
          if (log) events[static_cast<std::size_t>(j0)].push_back({0, k, w, *t, CommKind::Copy, msg.size()});
        }
      });
      flush(events, log);
    }
    return s;
  }

  /// Each process interacts and evolves its center particles with its own
  /// copy of g. Ghost compartments are not modified.
  DistributedState step_all(DistributedState s) const {
    check_shape(s);
    exec_.for_each(static_cast<std::int64_t>(s.storages.size()), [&](std::int64_t i) {
      const std::size_t w = static_cast<std::size_t>(i);
      const GlobalVar& g = s.globals[w];
      ProcessStorage& st = s.storages[w];
      Compartment next;
      for (const Particle& p : interact_center(st, g, spec_)) {
        for (Particle& q : spec_.evolve(g, p)) {
          if (!grid_.domain.contains(q.x))
            throw ConstraintViolation("particle " + std::to_string(q.id) + " left the domain at step t=" +
                                      std::to_string(g.t) + " on process " + std::to_string(i + 1));
          if (!within_cutoff(q.x, p.x, grid_.cutoff))
            throw ConstraintViolation("particle " + std::to_string(q.id) + " moved farther than the cutoff radius at step t=" +
                                      std::to_string(g.t) + " on process " + std::to_string(i + 1));
          next.push_back(std::move(q));
        }
      }
      st.center() = std::move(next);
    });
    return s;
  }

  /// Empties every storage and sorts the former center particles into the
  /// compartment alpha of their new position.
  DistributedState dist_all(DistributedState s) const {
    check_shape(s);
    exec_.for_each(static_cast<std::int64_t>(s.storages.size()), [&](std::int64_t i) {
      ProcessStorage& st = s.storages[static_cast<std::size_t>(i)];
      Compartment moved = std::move(st.center());
      for (Compartment& comp : st.compartments) comp.clear();
      for (Particle& p : moved) st.at(compartment_of(p.x, i + 1, grid_)).push_back(std::move(p));
    });
    return s;
  }

  /// Every active reader appends compartment mirror(l) of beta(w, l) to its
  /// own center. The center slot itself is not collected.
  DistributedState collect_all(DistributedState s, CommLog* log = nullptr) const {
    check_shape(s);
    const std::int64_t nk = topo_.compartments();
    const std::int64_t c = grid_.center();
    // outgoing compartments never change during collect; snapshot them once
    std::vector<std::shared_ptr<const ProcessStorage>> outgoing(s.storages.size());
    exec_.for_each(static_cast<std::int64_t>(s.storages.size()), [&](std::int64_t i) {
      ProcessStorage snap = s.storages[static_cast<std::size_t>(i)];
      snap.center().clear();
      outgoing[static_cast<std::size_t>(i)] = std::make_shared<const ProcessStorage>(std::move(snap));
    });
    for (std::int64_t k = 1; k <= nk; ++k) {
      const std::int64_t active = topo_.pattern_size(k);
      std::vector<std::vector<CommEvent>> events(static_cast<std::size_t>(active));
      exec_.for_each(active, [&](std::int64_t j0) {
        const std::int64_t w = topo_.active(k, j0 + 1);
        Compartment& center = s.storage(w).center();
        for (std::int64_t l = 1; l <= nk; ++l) {
          if (l == c) continue;
          const std::optional<std::int64_t> t = topo_.neighbor(w, l);
          if (!t) continue;
          const Compartment& msg = outgoing.at(static_cast<std::size_t>(*t - 1))->at(mirror_[static_cast<std::size_t>(l - 1)]);
          center.insert(center.end(), msg.begin(), msg.end());
          if (log) events[static_cast<std::size_t>(j0)].push_back({0, k, w, *t, CommKind::Collect, msg.size()});
        }
      });
      flush(events, log);
    }
    return s;
  }

  /// [map e_g over G, collect(dist(step(copy(P))))].
  DistributedState parallel_step(DistributedState s, CommLog* log = nullptr) const {
    check_shape(s);
    if (spec_.stop(s.globals.front()))
      throw UsageError("parallel_step called on a state whose stopping condition already holds");
    DistributedState next = collect_all(dist_all(step_all(copy_all(std::move(s), log))), log);
    require_unique_ids(gather_centers(next).particles);
    for (GlobalVar& g : next.globals) g = spec_.evolve_global(g);
    return next;
  }

  ParallelRunResult parallel_run(const DistributedState& initial, const ParallelRunOptions& opts = {}) const {
    check_shape(initial);
    ParallelRunResult r{initial, 1, {}, {}};
    if (opts.keep_trace) r.trace.push_back(gather_centers(r.final));
    while (!spec_.stop(r.final.globals.front())) {
      if (r.T > opts.max_steps)
        throw NonTermination("stopping condition not reached after " + std::to_string(opts.max_steps) + " steps");
      r.final = parallel_step(std::move(r.final), opts.keep_log ? &r.log : nullptr);
      ++r.T;
      if (opts.keep_trace) r.trace.push_back(gather_centers(r.final));
    }
    return r;
  }

  ParallelRunResult parallel_run(const Instance& inst, const ParallelRunOptions& opts = {}) const {
    return parallel_run(distribute_initial(inst, grid_), opts);
  }

 private:
  void check_shape(const DistributedState& s) const {
    const auto n = static_cast<std::size_t>(grid_.n_cell());
    if (s.globals.size() != n || s.storages.size() != n)
      throw UsageError("distributed state has " + std::to_string(s.storages.size()) + " processes, grid has " +
                       std::to_string(n));
    if (n == 0) throw UsageError("empty distributed state");
  }

  static void flush(std::vector<std::vector<CommEvent>>& events, CommLog* log) {
    if (!log) return;
    const std::int64_t phase = log->next_phase++;
    for (auto& per_reader : events)
      for (CommEvent& e : per_reader) {
        e.phase = phase;
        log->events.push_back(e);
      }
  }

  AlgorithmSpec spec_;
  CellGrid grid_;
  Topology topo_;
  Executor exec_;
  std::vector<std::int64_t> mirror_;
};

}  // namespace pm
