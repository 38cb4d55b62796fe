/* bespoke: hardwired-coefficient classifier circuits
 * Copyright (c) 2026 bespoke contributors
 * SPDX-License-Identifier: MIT
 */

/*!
  \file gate_prune.hpp
  \brief Activity-guided gate pruning: rarely-switching gates become
  hardwired constants under a train-accuracy budget

  Candidates are ranked by ascending toggle rate and tried in batches;
  a failing batch is bisected down to single decisions, which are then
  rejected for the rest of the pass. Passes repeat, re-profiling with all
  accepted replacements in force, until one accepts nothing, so a second
  run under the same baseline changes nothing. Candidate evaluation forces
  node values in place of rebuilding; since constant propagation preserves
  semantics, the measured accuracy equals that of the rebuilt netlist.
*/

#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "builder.hpp"
#include "netlist.hpp"

namespace bespoke
{

struct prune_decision
{
  uint32_t gate = 0;
  bool replacement = false; /* the gate's majority observed value */
  double toggle_rate = 0.0;
  double one_fraction = 0.0;
};

/*! \brief Every logic gate as a pruning candidate, cheapest first:
 * ascending toggle rate, gate id as tie-break. Replacement is the majority
 * observed value; an exact tie prefers constant 0.
 */
inline std::vector<prune_decision> rank_gates( netlist const& n, activity_profile const& act )
{
  if ( act.num_rows < 2 )
    throw simulation_error( n.name + ": ranking needs at least two stimulus rows" );
  std::vector<prune_decision> out;
  for ( size_t i = 0; i < n.nodes.size(); ++i )
  {
    if ( !is_logic_gate( n.nodes[i].op ) )
      continue;
    prune_decision d;
    d.gate = static_cast<uint32_t>( i );
    d.toggle_rate = act.toggle_rate[i];
    d.one_fraction = act.one_fraction[i];
    d.replacement = act.one_fraction[i] > 0.5;
    out.push_back( d );
  }
  std::stable_sort( out.begin(), out.end(), []( prune_decision const& a, prune_decision const& b ) {
    if ( a.toggle_rate != b.toggle_rate )
      return a.toggle_rate < b.toggle_rate;
    return a.gate < b.gate;
  } );
  return out;
}

struct prune_log_entry
{
  prune_decision decision;
  int pass = 0;
  bool accepted = false;
};

struct prune_result
{
  netlist n;
  std::vector<prune_log_entry> log;
  double accuracy_before = 0.0; /* baseline the budget is measured from */
  double accuracy_after = 0.0;
  size_t accepted = 0;
  int passes = 0;
};

namespace detail
{

/*! \brief Train accuracy of the label port under an optional force map. */
inline double forced_accuracy( netlist const& n, std::vector<std::vector<int64_t>> const& stimuli,
                               std::vector<int> const& labels, force_map const* force, unsigned threads )
{
  const auto sim = simulate( n, stimuli, threads, force );
  size_t hits = 0;
  for ( size_t r = 0; r < sim.size(); ++r )
  {
    if ( sim[r][0] == labels[r] )
      ++hits;
  }
  return static_cast<double>( hits ) / static_cast<double>( sim.size() );
}

} // namespace detail

/*! \brief Greedy activity-ranked pruning under an accuracy budget in
 * percentage points, measured against `baseline_accuracy` when given
 * (fractional, e.g. 0.91) and against the input netlist otherwise.
 * The returned netlist is constant-propagated; area never increases.
 */
inline prune_result prune( netlist const& n, std::vector<std::vector<int64_t>> const& stimuli,
                           std::vector<int> const& labels, double accuracy_budget_pp, size_t batch = 32,
                           unsigned threads = 1, double baseline_accuracy = -1.0 )
{
  if ( accuracy_budget_pp < 0.0 )
    throw validation_error( "prune", "budget must be nonnegative" );
  if ( batch == 0 )
    throw validation_error( "prune", "batch must be positive" );
  if ( stimuli.size() != labels.size() || stimuli.size() < 2 )
    throw validation_error( "prune", "need at least two labeled stimulus rows" );

  prune_result result;
  result.accuracy_before =
      baseline_accuracy >= 0.0 ? baseline_accuracy : detail::forced_accuracy( n, stimuli, labels, nullptr, threads );
  const double floor = result.accuracy_before - accuracy_budget_pp / 100.0;

  force_map force( n.nodes.size(), -1 );
  std::vector<uint8_t> accepted( n.nodes.size(), 0 );

  const auto fits = [&]() { return detail::forced_accuracy( n, stimuli, labels, &force, threads ) >= floor - 1e-12; };

  while ( true )
  {
    ++result.passes;
    const auto profile = profile_activity( n, stimuli, threads, &force );
    auto ranked = rank_gates( n, profile );
    ranked.erase( std::remove_if( ranked.begin(), ranked.end(),
                                  [&]( prune_decision const& d ) { return accepted[d.gate] != 0; } ),
                  ranked.end() );

    size_t accepts_this_pass = 0;

    /* accepts a whole range or recursively bisects it; singles that fail
     * stay rejected for this pass */
    const auto try_range = [&]( auto&& self, size_t lo, size_t hi ) -> void {
      if ( lo >= hi )
        return;
      for ( size_t k = lo; k < hi; ++k )
        force[ranked[k].gate] = ranked[k].replacement ? 1 : 0;
      if ( fits() )
      {
        for ( size_t k = lo; k < hi; ++k )
        {
          accepted[ranked[k].gate] = 1;
          ++accepts_this_pass;
          result.log.push_back( { ranked[k], result.passes, true } );
        }
        return;
      }
      for ( size_t k = lo; k < hi; ++k )
        force[ranked[k].gate] = -1;
      if ( hi - lo == 1 )
      {
        result.log.push_back( { ranked[lo], result.passes, false } );
        return;
      }
      const size_t mid = lo + ( hi - lo ) / 2;
      self( self, lo, mid );
      self( self, mid, hi );
    };

    for ( size_t at = 0; at < ranked.size(); at += batch )
      try_range( try_range, at, std::min( ranked.size(), at + batch ) );

    if ( accepts_this_pass == 0 )
      break;
  }

  std::vector<std::pair<uint32_t, bool>> replacements;
  for ( size_t i = 0; i < accepted.size(); ++i )
  {
    if ( accepted[i] )
      replacements.push_back( { static_cast<uint32_t>( i ), force[i] == 1 } );
  }
  result.accepted = replacements.size();

  if ( replacements.empty() )
    result.n = n;
  else
    result.n = const_propagate( replace_with_constants( n, replacements ) );

  result.accuracy_after = detail::forced_accuracy( result.n, stimuli, labels, nullptr, threads );
  if ( area( result.n ).gate_equivalents > area( n ).gate_equivalents )
    throw simulation_error( n.name + ": pruning increased area" );
  return result;
}

inline nlohmann::json prune_log_to_json( prune_result const& r )
{
  nlohmann::json j;
  j["accuracy_before"] = r.accuracy_before;
  j["accuracy_after"] = r.accuracy_after;
  j["accepted"] = r.accepted;
  j["passes"] = r.passes;
  auto& entries = j["decisions"] = nlohmann::json::array();
  for ( auto const& e : r.log )
  {
    entries.push_back( { { "gate", e.decision.gate },
                         { "replacement", e.decision.replacement ? 1 : 0 },
                         { "toggle_rate", e.decision.toggle_rate },
                         { "pass", e.pass },
                         { "accepted", e.accepted } } );
  }
  return j;
}

} // namespace bespoke
