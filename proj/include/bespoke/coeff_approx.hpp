/* bespoke: hardwired-coefficient classifier circuits
 * Copyright (c) 2026 bespoke contributors
 * SPDX-License-Identifier: MIT
 */

/*!
  \file coeff_approx.hpp
  \brief Hardware-aware coefficient replacement for weighted sums

  Each coefficient may be swapped for a nearby value whose hardwired
  multiplier is cheaper, under the constraint that the signed deviations
  within one neuron (or one binary classifier) stay inside an integer
  budget, so the induced errors cancel each other instead of accumulating.
*/

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "netlist.hpp"
#include "quantized.hpp"
#include "synth.hpp"

namespace bespoke
{

struct weight_candidate
{
  int64_t value = 0;
  double mult_area = 0.0;
};

struct candidate_set_result
{
  int64_t original = 0;
  int64_t window = 0;
  std::vector<weight_candidate> candidates; /* cheapest first */
};

/*! \brief Memoized multiplier cost, keyed by coefficient and operand shape. */
class mult_area_cache
{
public:
  double operator()( int64_t c, int in_bits, bool in_signed )
  {
    const auto key = std::make_tuple( c, in_bits, in_signed );
    const auto it = cache_.find( key );
    if ( it != cache_.end() )
      return it->second;
    const double a = area( synth_const_mult( c, in_bits, in_signed ).n ).gate_equivalents;
    cache_.emplace( key, a );
    return a;
  }

private:
  std::map<std::tuple<int64_t, int, bool>, double> cache_;
};

/*! \brief All replacement values within ±Δ whose multiplier is cheaper than
 * the original's, plus the original itself; cheapest first, ties broken by
 * distance from the original, then by value.
 */
inline candidate_set_result candidate_set( int64_t w, int64_t delta, int in_bits, bool in_signed = false,
                                           mult_area_cache* cache = nullptr )
{
  if ( delta < 0 )
    throw validation_error( "candidate_set", "window must be nonnegative" );
  mult_area_cache local;
  mult_area_cache& areas = cache ? *cache : local;
  candidate_set_result r;
  r.original = w;
  r.window = delta;
  const double original_area = areas( w, in_bits, in_signed );
  for ( int64_t v = w - delta; v <= w + delta; ++v )
  {
    const double a = areas( v, in_bits, in_signed );
    if ( v == w || a < original_area )
      r.candidates.push_back( { v, a } );
  }
  std::sort( r.candidates.begin(), r.candidates.end(), [&]( weight_candidate const& a, weight_candidate const& b ) {
    if ( a.mult_area != b.mult_area )
      return a.mult_area < b.mult_area;
    const int64_t da = std::abs( a.value - w );
    const int64_t db = std::abs( b.value - w );
    if ( da != db )
      return da < db;
    return a.value < b.value;
  } );
  return r;
}

/*! \brief One adopted replacement, for auditing the cancellation discipline. */
struct adoption
{
  size_t position = 0;
  int64_t original = 0;
  int64_t chosen = 0;
  int64_t error_before = 0; /* running neuron error when adopted */
  int64_t error_after = 0;
};

struct neuron_plan
{
  std::string name;
  std::vector<adoption> adoptions; /* in adoption order */
  int64_t neuron_error = 0;
  double area_before = 0.0;
  double area_after = 0.0;
};

struct replacement_plan
{
  int64_t window = 0;        /* Δ that produced the accepted model */
  int64_t error_budget = 0;  /* per-neuron bound on |Σ deviations| */
  std::vector<neuron_plan> neurons;
  double train_accuracy_before = 0.0;
  double train_accuracy_after = 0.0;

  bool identity() const
  {
    for ( auto const& n : neurons )
    {
      for ( auto const& a : n.adoptions )
      {
        if ( a.chosen != a.original )
          return false;
      }
    }
    return true;
  }
};

namespace detail
{

/*! \brief Greedy cancellation pass over one weight row, in place. */
inline neuron_plan approximate_row( std::vector<int64_t>& weights, std::string name, int64_t delta,
                                    int64_t error_budget, int in_bits, bool in_signed, mult_area_cache& areas )
{
  neuron_plan plan;
  plan.name = std::move( name );

  std::vector<candidate_set_result> sets;
  sets.reserve( weights.size() );
  for ( int64_t w : weights )
    sets.push_back( candidate_set( w, delta, in_bits, in_signed, &areas ) );

  /* visit weights by descending potential saving, position as tie-break */
  std::vector<size_t> order( weights.size() );
  for ( size_t i = 0; i < order.size(); ++i )
    order[i] = i;
  const auto saving = [&]( size_t i ) {
    return areas( weights[i], in_bits, in_signed ) - sets[i].candidates.front().mult_area;
  };
  std::stable_sort( order.begin(), order.end(), [&]( size_t a, size_t b ) { return saving( a ) > saving( b ); } );

  int64_t err = 0;
  for ( size_t i : order )
  {
    const int64_t original = weights[i];
    plan.area_before += areas( original, in_bits, in_signed );
    for ( auto const& c : sets[i].candidates )
    {
      const int64_t dev = c.value - original;
      if ( std::abs( err + dev ) > error_budget )
        continue;
      if ( err > 0 && dev > 0 )
        continue;
      if ( err < 0 && dev < 0 )
        continue;
      adoption a;
      a.position = i;
      a.original = original;
      a.chosen = c.value;
      a.error_before = err;
      err += dev;
      a.error_after = err;
      plan.adoptions.push_back( a );
      weights[i] = c.value;
      plan.area_after += c.mult_area;
      break;
    }
  }
  plan.neuron_error = err;
  return plan;
}

inline std::pair<int, bool> operand_shape( value_interval hull )
{
  return { width_for( hull.lo, hull.hi ), hull.lo < 0 };
}

inline value_interval hull_of( std::vector<value_interval> const& ivs )
{
  value_interval h = ivs.front();
  for ( auto const& v : ivs )
  {
    h.lo = std::min( h.lo, v.lo );
    h.hi = std::max( h.hi, v.hi );
  }
  return h;
}

} // namespace detail

struct approx_result
{
  quantized_model model;
  replacement_plan plan;
};

/*! \brief Cancellation-aware coefficient replacement under a train-accuracy
 * budget (percentage points). Halves the window and retries when the budget
 * is violated; at Δ=0 the input model is returned unchanged.
 */
inline approx_result approximate_sums( quantized_model const& q, dataset const& train, int64_t delta,
                                       double accuracy_budget_pp )
{
  if ( !q.is_mlp() && !q.is_svm() )
    throw validation_error( "approximate_sums", "model must be an mlp or svm" );
  const double base_acc = accuracy( q, train ) * 100.0;

  mult_area_cache areas;
  for ( int64_t d = delta; ; d /= 2 )
  {
    if ( d <= 0 )
    {
      approx_result id;
      id.model = q;
      id.plan.window = 0;
      id.plan.error_budget = 0;
      id.plan.train_accuracy_before = base_acc;
      id.plan.train_accuracy_after = base_acc;
      return id;
    }

    approx_result r;
    r.model = q;
    r.plan.window = d;
    r.plan.error_budget = d;

    const auto intervals = compute_intervals( q );
    if ( r.model.is_mlp() )
    {
      auto& layers = r.model.mlp().layers;
      for ( size_t l = 0; l < layers.size(); ++l )
      {
        const auto [bits, is_signed] =
            l == 0 ? std::pair<int, bool>{ q.input_format.total_bits, false }
                   : detail::operand_shape( detail::hull_of( intervals.activated[l - 1] ) );
        for ( size_t o = 0; o < layers[l].weights.size(); ++o )
        {
          r.plan.neurons.push_back( detail::approximate_row(
              layers[l].weights[o], "layer" + std::to_string( l ) + ".neuron" + std::to_string( o ), d, d, bits,
              is_signed, areas ) );
        }
      }
    }
    else
    {
      auto& units = r.model.svm().units;
      for ( size_t u = 0; u < units.size(); ++u )
      {
        r.plan.neurons.push_back( detail::approximate_row( units[u].weights, "unit" + std::to_string( u ), d, d,
                                                           q.input_format.total_bits, false, areas ) );
      }
    }

    compute_intervals( r.model ); /* re-check accumulator widths */
    const double acc = accuracy( r.model, train ) * 100.0;
    if ( base_acc - acc <= accuracy_budget_pp )
    {
      r.plan.train_accuracy_before = base_acc;
      r.plan.train_accuracy_after = acc;
      return r;
    }
  }
}

inline nlohmann::json plan_to_json( replacement_plan const& plan )
{
  nlohmann::json j;
  j["window"] = plan.window;
  j["error_budget"] = plan.error_budget;
  j["train_accuracy_before"] = plan.train_accuracy_before;
  j["train_accuracy_after"] = plan.train_accuracy_after;
  auto& neurons = j["neurons"] = nlohmann::json::array();
  for ( auto const& n : plan.neurons )
  {
    nlohmann::json e;
    e["name"] = n.name;
    e["neuron_error"] = n.neuron_error;
    e["area_before"] = n.area_before;
    e["area_after"] = n.area_after;
    auto& adoptions = e["adoptions"] = nlohmann::json::array();
    for ( auto const& a : n.adoptions )
    {
      adoptions.push_back( { { "position", a.position },
                             { "original", a.original },
                             { "chosen", a.chosen },
                             { "error_before", a.error_before },
                             { "error_after", a.error_after } } );
    }
    neurons.push_back( std::move( e ) );
  }
  return j;
}

} // namespace bespoke
