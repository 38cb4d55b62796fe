/* bespoke: hardwired-coefficient classifier circuits
 * Copyright (c) 2026 bespoke contributors
 * SPDX-License-Identifier: MIT
 */

/*!
  \file dt_evolve.hpp
  \brief Evolutionary threshold / input-precision search for decision trees

  Each internal comparator gets one gene: a replacement threshold within a
  window around the original code and the number of top operand bits the
  compare keeps. Fitness is (validation accuracy loss in percentage points,
  summed comparator area); the search is a standard elitist two-objective
  genetic loop over those genes. RNG streams are split per (generation,
  individual) so results do not depend on evaluation parallelism.
*/

#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <iterator>
#include <map>
#include <random>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dataset.hpp"
#include "nsga2.hpp"
#include "quantized.hpp"
#include "rng.hpp"
#include "synth.hpp"

namespace bespoke
{

/*! \brief One comparator's configuration: the hardwired threshold code and
 * how many top bits of both compare operands are kept.
 */
struct dt_gene
{
  int64_t threshold = 0;
  int input_bits = 0;

  bool operator==( dt_gene const& other ) const = default;
};

struct dt_gene_bounds
{
  int64_t threshold_lo = 0;
  int64_t threshold_hi = 0;
  int bits_hi = 0; /* lower bound is always 1 */
};

struct pareto_point
{
  std::vector<dt_gene> genome;
  double accuracy_loss_pp = 0.0;
  double area_proxy = 0.0;
  size_t rank = 0;
  double crowding = 0.0;
};

struct dt_evolve_params
{
  int population = 100;
  int generations = 100;
  uint64_t seed = 1;
  double crossover_p = 0.9;
  double mutation_p = -1.0; /* < 0 picks 1 / gene count */
  int64_t threshold_delta = 8;
  double loss_budget_pp = 1.0;
  unsigned threads = 1;
};

struct dt_evolve_result
{
  std::vector<pareto_point> front; /* final non-dominated set */
  std::vector<dt_gene> selected_genome;
  double selected_loss_pp = 0.0;
  double selected_area = 0.0;
  double baseline_accuracy = 0.0; /* exact genome on the validation split */
  double baseline_area = 0.0;
  size_t evaluations = 0;
};

/*! \brief Memo table for comparator areas keyed by (truncated threshold,
 * kept bits); every entry is the gate-equivalent area of a freshly
 * synthesized comparator.
 */
class comparator_area_cache
{
public:
  double get( int64_t truncated_threshold, int bits )
  {
    const auto key = std::make_pair( truncated_threshold, bits );
    const auto it = areas_.find( key );
    if ( it != areas_.end() )
      return it->second;
    const double a = area( synth_comparator( static_cast<uint64_t>( truncated_threshold ), bits ) ).gate_equivalents;
    areas_.emplace( key, a );
    return a;
  }

private:
  std::map<std::pair<int64_t, int>, double> areas_;
};

/*! \brief Internal (non-leaf) node indices of a tree body, ascending. */
inline std::vector<int> internal_nodes( q_tree_body const& t )
{
  std::vector<int> ids;
  for ( size_t i = 0; i < t.nodes.size(); ++i )
  {
    if ( !t.nodes[i].is_leaf() )
      ids.push_back( static_cast<int>( i ) );
  }
  return ids;
}

/*! \brief Per-gene sampling bounds: thresholds stay within +-delta of the
 * original code, clamped to the representable range; bit counts stay within
 * [1, input word width].
 */
inline std::vector<dt_gene_bounds> gene_bounds( quantized_model const& q, int64_t threshold_delta )
{
  if ( !q.is_tree() )
    throw validation_error( "dt-evolve", "model is not a decision tree" );
  if ( threshold_delta < 0 )
    throw validation_error( "dt-evolve", "negative threshold window" );
  const int total = q.input_format.total_bits;
  const int64_t max_code = ( int64_t{ 1 } << total ) - 1;
  std::vector<dt_gene_bounds> bounds;
  for ( int id : internal_nodes( q.tree() ) )
  {
    auto const& node = q.tree().nodes[static_cast<size_t>( id )];
    dt_gene_bounds b;
    b.threshold_lo = std::max<int64_t>( 0, node.threshold - threshold_delta );
    b.threshold_hi = std::min<int64_t>( max_code, node.threshold + threshold_delta );
    b.bits_hi = total;
    bounds.push_back( b );
  }
  return bounds;
}

/*! \brief The unmodified configuration: original thresholds at the model's
 * current comparator precision.
 */
inline std::vector<dt_gene> exact_genome( quantized_model const& q )
{
  if ( !q.is_tree() )
    throw validation_error( "dt-evolve", "model is not a decision tree" );
  std::vector<dt_gene> genome;
  for ( int id : internal_nodes( q.tree() ) )
  {
    auto const& node = q.tree().nodes[static_cast<size_t>( id )];
    genome.push_back( { node.threshold, node.compare_bits } );
  }
  return genome;
}

/*! \brief Copies the model and overwrites each internal node's threshold and
 * compare width from the genome.
 */
inline quantized_model apply_genome( quantized_model const& q, std::vector<dt_gene> const& genome )
{
  quantized_model out = q;
  const auto ids = internal_nodes( out.tree() );
  if ( genome.size() != ids.size() )
    throw validation_error( "dt-evolve", "genome length does not match the tree" );
  for ( size_t g = 0; g < ids.size(); ++g )
  {
    auto& node = out.tree().nodes[static_cast<size_t>( ids[g] )];
    if ( genome[g].input_bits < 1 || genome[g].input_bits > q.input_format.total_bits )
      throw validation_error( "dt-evolve", "gene bit count out of range" );
    node.threshold = genome[g].threshold;
    node.compare_bits = genome[g].input_bits;
  }
  return out;
}

/*! \brief Summed gate-equivalent area of the comparators a genome implies.
 * Each term is the area of a comparator against the top `input_bits` of the
 * operand, with the threshold truncated to the same width.
 */
inline double dt_area_proxy( std::vector<dt_gene> const& genome, quantized_model const& q,
                             comparator_area_cache* cache = nullptr )
{
  if ( !q.is_tree() )
    throw validation_error( "dt-evolve", "model is not a decision tree" );
  comparator_area_cache local;
  comparator_area_cache& memo = cache != nullptr ? *cache : local;
  const int total = q.input_format.total_bits;
  double sum = 0.0;
  for ( auto const& gene : genome )
  {
    if ( gene.input_bits < 1 || gene.input_bits > total )
      throw validation_error( "dt-evolve", "gene bit count out of range" );
    const int64_t truncated = gene.threshold >> ( total - gene.input_bits );
    sum += memo.get( truncated, gene.input_bits );
  }
  return sum;
}

inline uint64_t genome_hash( std::vector<dt_gene> const& genome )
{
  uint64_t h = 1469598103934665603ULL;
  const auto mix = [&h]( uint64_t v ) {
    for ( int i = 0; i < 8; ++i )
    {
      h ^= ( v >> ( 8 * i ) ) & 0xffu;
      h *= 1099511628211ULL;
    }
  };
  for ( auto const& gene : genome )
  {
    mix( static_cast<uint64_t>( gene.threshold ) );
    mix( static_cast<uint64_t>( gene.input_bits ) );
  }
  return h;
}

namespace detail
{

inline double row_accuracy( quantized_model const& q, std::vector<std::vector<int64_t>> const& codes,
                            std::vector<int> const& labels )
{
  size_t hits = 0;
  for ( size_t r = 0; r < codes.size(); ++r )
  {
    if ( infer_codes( q, codes[r] ).label == labels[r] )
      ++hits;
  }
  return static_cast<double>( hits ) / static_cast<double>( codes.size() );
}

} // namespace detail

/*! \brief Two-objective genetic search over per-comparator (threshold, kept
 * bits) genes. The initial population is seeded with the exact genome, so a
 * zero-loss configuration is always evaluated; the selected configuration is
 * the cheapest evaluated genome whose validation loss stays within the
 * budget. Fixed (inputs, params, seed) give identical results at any thread
 * count.
 */
inline dt_evolve_result evolve( quantized_model const& q, dataset const& train, dataset const& validation,
                                dt_evolve_params const& params )
{
  if ( !q.is_tree() )
    throw validation_error( "dt-evolve", "model is not a decision tree" );
  if ( params.population < 4 || params.population % 2 != 0 )
    throw validation_error( "dt-evolve", "population must be even and at least 4" );
  if ( params.generations < 0 )
    throw validation_error( "dt-evolve", "negative generation count" );
  if ( params.crossover_p < 0.0 || params.crossover_p > 1.0 )
    throw validation_error( "dt-evolve", "crossover probability outside [0, 1]" );
  if ( validation.size() == 0 )
    throw validation_error( "dt-evolve", "empty validation split" );
  if ( train.size() == 0 )
    throw validation_error( "dt-evolve", "empty training split" );

  const auto bounds = gene_bounds( q, params.threshold_delta );
  const size_t genes = bounds.size();
  const double mutation_p = params.mutation_p >= 0.0 ? params.mutation_p
                                                     : 1.0 / static_cast<double>( std::max<size_t>( genes, 1 ) );

  std::vector<std::vector<int64_t>> codes;
  codes.reserve( validation.size() );
  for ( auto const& row : validation.rows )
    codes.push_back( quantize_inputs( q, row ) );

  comparator_area_cache memo;
  dt_evolve_result result;
  result.baseline_accuracy = detail::row_accuracy( q, codes, validation.labels );
  result.baseline_area = dt_area_proxy( exact_genome( q ), q, &memo );

  struct individual
  {
    std::vector<dt_gene> genome;
    objective_pair fit;
    bool evaluated = false;
  };

  /* best feasible configuration over every evaluated genome */
  bool have_selected = false;
  const auto consider = [&]( individual const& ind ) {
    if ( ind.fit.loss > params.loss_budget_pp )
      return;
    if ( !have_selected || ind.fit.area < result.selected_area ||
         ( ind.fit.area == result.selected_area && ind.fit.loss < result.selected_loss_pp ) )
    {
      have_selected = true;
      result.selected_genome = ind.genome;
      result.selected_loss_pp = ind.fit.loss;
      result.selected_area = ind.fit.area;
    }
  };

  const auto evaluate_all = [&]( std::vector<individual>& pop ) {
    std::vector<size_t> todo;
    for ( size_t i = 0; i < pop.size(); ++i )
    {
      if ( !pop[i].evaluated )
        todo.push_back( i );
    }
    /* comparator areas first: the memo table is shared, so keep it single
     * threaded; accuracy evaluation is pure and parallelizes by index */
    for ( size_t k : todo )
      pop[k].fit.area = dt_area_proxy( pop[k].genome, q, &memo );
    const auto worker = [&]( size_t begin, size_t end ) {
      for ( size_t t = begin; t < end; ++t )
      {
        auto& ind = pop[todo[t]];
        const auto model = apply_genome( q, ind.genome );
        ind.fit.loss = ( result.baseline_accuracy - detail::row_accuracy( model, codes, validation.labels ) ) * 100.0;
      }
    };
    const size_t nthreads = std::max<size_t>( 1, std::min<size_t>( params.threads, todo.size() ) );
    if ( nthreads <= 1 )
    {
      worker( 0, todo.size() );
    }
    else
    {
      std::vector<std::thread> pool;
      const size_t chunk = ( todo.size() + nthreads - 1 ) / nthreads;
      for ( size_t t = 0; t < nthreads; ++t )
        pool.emplace_back( worker, std::min( t * chunk, todo.size() ), std::min( ( t + 1 ) * chunk, todo.size() ) );
      for ( auto& th : pool )
        th.join();
    }
    for ( size_t k : todo )
    {
      pop[k].evaluated = true;
      consider( pop[k] );
    }
    result.evaluations += todo.size();
  };

  const auto random_gene = [&]( size_t g, std::mt19937_64& rng ) {
    std::uniform_int_distribution<int64_t> thr( bounds[g].threshold_lo, bounds[g].threshold_hi );
    std::uniform_int_distribution<int> bits( 1, bounds[g].bits_hi );
    return dt_gene{ thr( rng ), bits( rng ) };
  };

  const size_t pop_size = static_cast<size_t>( params.population );
  std::vector<individual> pop( pop_size );
  pop[0].genome = exact_genome( q );
  for ( size_t i = 1; i < pop_size; ++i )
  {
    std::mt19937_64 rng( derive_seed( params.seed, "dt-evolve/init", 0, i ) );
    pop[i].genome.resize( genes );
    for ( size_t g = 0; g < genes; ++g )
      pop[i].genome[g] = random_gene( g, rng );
  }
  evaluate_all( pop );

  const auto objectives = []( std::vector<individual> const& v ) {
    std::vector<objective_pair> obj;
    obj.reserve( v.size() );
    for ( auto const& ind : v )
      obj.push_back( ind.fit );
    return obj;
  };

  for ( int gen = 1; gen <= params.generations && genes > 0; ++gen )
  {
    const auto obj = objectives( pop );
    const auto fronts = fast_nondominated_sort( obj );
    std::vector<size_t> rank( pop_size, 0 );
    std::vector<double> crowd( pop_size, 0.0 );
    for ( size_t f = 0; f < fronts.size(); ++f )
    {
      const auto c = crowding_distance( obj, fronts[f] );
      for ( size_t m = 0; m < fronts[f].size(); ++m )
      {
        rank[fronts[f][m]] = f;
        crowd[fronts[f][m]] = c[m];
      }
    }

    std::vector<individual> children;
    children.reserve( pop_size );
    for ( size_t pair = 0; pair < pop_size / 2; ++pair )
    {
      std::mt19937_64 rng(
          derive_seed( params.seed, "dt-evolve/var", static_cast<uint64_t>( gen ), pair ) );
      std::uniform_int_distribution<size_t> any( 0, pop_size - 1 );
      const auto tournament = [&]() {
        const size_t a = any( rng );
        const size_t b = any( rng );
        if ( crowded_less( rank[a], crowd[a], rank[b], crowd[b] ) )
          return a;
        if ( crowded_less( rank[b], crowd[b], rank[a], crowd[a] ) )
          return b;
        return std::min( a, b );
      };
      std::uniform_real_distribution<double> coin( 0.0, 1.0 );
      individual c1{ pop[tournament()].genome, {}, false };
      individual c2{ pop[tournament()].genome, {}, false };
      if ( coin( rng ) < params.crossover_p )
      {
        for ( size_t g = 0; g < genes; ++g )
        {
          if ( coin( rng ) < 0.5 )
            std::swap( c1.genome[g], c2.genome[g] );
        }
      }
      for ( auto* child : { &c1, &c2 } )
      {
        for ( size_t g = 0; g < genes; ++g )
        {
          if ( coin( rng ) < mutation_p )
            child->genome[g] = random_gene( g, rng );
        }
      }
      children.push_back( std::move( c1 ) );
      children.push_back( std::move( c2 ) );
    }
    evaluate_all( children );

    std::vector<individual> combined = std::move( pop );
    combined.insert( combined.end(), std::make_move_iterator( children.begin() ),
                     std::make_move_iterator( children.end() ) );
    const auto all_obj = objectives( combined );
    const auto all_fronts = fast_nondominated_sort( all_obj );
    std::vector<individual> next;
    next.reserve( pop_size );
    for ( auto const& front : all_fronts )
    {
      if ( next.size() + front.size() <= pop_size )
      {
        for ( size_t id : front )
          next.push_back( std::move( combined[id] ) );
        if ( next.size() == pop_size )
          break;
        continue;
      }
      const auto c = crowding_distance( all_obj, front );
      std::vector<size_t> order( front.size() );
      for ( size_t m = 0; m < order.size(); ++m )
        order[m] = m;
      std::stable_sort( order.begin(), order.end(), [&]( size_t a, size_t b ) { return c[a] > c[b]; } );
      for ( size_t m = 0; next.size() < pop_size; ++m )
        next.push_back( std::move( combined[front[order[m]]] ) );
      break;
    }
    pop = std::move( next );
  }

  const auto obj = objectives( pop );
  const auto fronts = fast_nondominated_sort( obj );
  const auto crowd = crowding_distance( obj, fronts[0] );
  for ( size_t m = 0; m < fronts[0].size(); ++m )
  {
    auto const& ind = pop[fronts[0][m]];
    result.front.push_back( { ind.genome, ind.fit.loss, ind.fit.area, 0, crowd[m] } );
  }
  std::stable_sort( result.front.begin(), result.front.end(), []( pareto_point const& a, pareto_point const& b ) {
    if ( a.accuracy_loss_pp != b.accuracy_loss_pp )
      return a.accuracy_loss_pp < b.accuracy_loss_pp;
    return a.area_proxy < b.area_proxy;
  } );
  return result;
}

namespace detail
{

inline std::string format_double( double v )
{
  char buf[64];
  std::snprintf( buf, sizeof buf, "%.10g", v );
  return buf;
}

} // namespace detail

/*! \brief Front as CSV, one row per point. */
inline std::string pareto_csv( std::vector<pareto_point> const& points )
{
  std::string out = "genome-hash,accuracy_loss_pp,area_proxy,rank\n";
  for ( auto const& p : points )
  {
    char hash[32];
    std::snprintf( hash, sizeof hash, "%016llx", static_cast<unsigned long long>( genome_hash( p.genome ) ) );
    out += hash;
    out += ',';
    out += detail::format_double( p.accuracy_loss_pp );
    out += ',';
    out += detail::format_double( p.area_proxy );
    out += ',';
    out += std::to_string( p.rank );
    out += '\n';
  }
  return out;
}

/*! \brief Selected configuration as JSON: one record per internal tree node
 * plus the objectives it achieved.
 */
inline nlohmann::json selected_config_json( quantized_model const& q, dt_evolve_result const& r )
{
  nlohmann::json nodes = nlohmann::json::array();
  const auto ids = internal_nodes( q.tree() );
  for ( size_t g = 0; g < r.selected_genome.size(); ++g )
  {
    nodes.push_back( { { "node", ids[g] },
                       { "threshold", r.selected_genome[g].threshold },
                       { "input_bits", r.selected_genome[g].input_bits } } );
  }
  return { { "model", "decision_tree" },
           { "nodes", nodes },
           { "accuracy_loss_pp", r.selected_loss_pp },
           { "area_proxy", r.selected_area },
           { "baseline_area_proxy", r.baseline_area } };
}

/*! \brief Reads a genome back from a selected-configuration JSON object. */
inline std::vector<dt_gene> genome_from_config_json( quantized_model const& q, nlohmann::json const& j )
{
  const auto ids = internal_nodes( q.tree() );
  std::vector<dt_gene> genome( ids.size() );
  if ( !j.contains( "nodes" ) || !j["nodes"].is_array() || j["nodes"].size() != ids.size() )
    throw validation_error( "dt-evolve", "configuration does not match the tree" );
  for ( auto const& rec : j["nodes"] )
  {
    const int node = rec.at( "node" ).get<int>();
    const auto it = std::find( ids.begin(), ids.end(), node );
    if ( it == ids.end() )
      throw validation_error( "dt-evolve", "configuration names node " + std::to_string( node ) );
    genome[static_cast<size_t>( it - ids.begin() )] = { rec.at( "threshold" ).get<int64_t>(),
                                                        rec.at( "input_bits" ).get<int>() };
  }
  return genome;
}

} // namespace bespoke
