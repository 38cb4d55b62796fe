/* bespoke: hardwired-coefficient classifier circuits
 * Copyright (c) 2026 bespoke contributors
 * SPDX-License-Identifier: MIT
 */

/*!
  \file nsga2.hpp
  \brief Two-objective non-dominated sorting machinery

  Both objectives are minimized. Fronts come from the standard O(N^2)
  dominance-counting sort; crowding is the normalized objective-gap sum
  with +infinity at each front's boundary points.
*/

#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <vector>

namespace bespoke
{

struct objective_pair
{
  double loss = 0.0;
  double area = 0.0;
};

/*! \brief Strict Pareto dominance: no worse in both, better in one. */
inline bool dominates( objective_pair const& p, objective_pair const& q )
{
  return p.loss <= q.loss && p.area <= q.area && ( p.loss < q.loss || p.area < q.area );
}

/*! \brief Front partition; front 0 is the non-dominated set, front k the
 * non-dominated set after removing fronts below k. Indices keep input order
 * inside each front.
 */
inline std::vector<std::vector<size_t>> fast_nondominated_sort( std::vector<objective_pair> const& points )
{
  const size_t n = points.size();
  std::vector<size_t> dominated_count( n, 0 );
  std::vector<std::vector<size_t>> dominates_list( n );
  std::vector<std::vector<size_t>> fronts;

  for ( size_t p = 0; p < n; ++p )
  {
    for ( size_t q = 0; q < n; ++q )
    {
      if ( p == q )
        continue;
      if ( dominates( points[p], points[q] ) )
        dominates_list[p].push_back( q );
      else if ( dominates( points[q], points[p] ) )
        ++dominated_count[p];
    }
  }
  std::vector<size_t> current;
  for ( size_t p = 0; p < n; ++p )
  {
    if ( dominated_count[p] == 0 )
      current.push_back( p );
  }
  while ( !current.empty() )
  {
    fronts.push_back( current );
    std::vector<size_t> next;
    for ( size_t p : current )
    {
      for ( size_t q : dominates_list[p] )
      {
        if ( --dominated_count[q] == 0 )
          next.push_back( q );
      }
    }
    std::sort( next.begin(), next.end() );
    current = std::move( next );
  }
  return fronts;
}

/*! \brief Crowding distance of one front, indexed like `front`. Boundary
 * points get +infinity; a zero objective span contributes nothing, so
 * interior duplicates stay finite.
 */
inline std::vector<double> crowding_distance( std::vector<objective_pair> const& points,
                                              std::vector<size_t> const& front )
{
  const size_t m = front.size();
  std::vector<double> crowd( m, 0.0 );
  if ( m == 0 )
    return crowd;
  if ( m <= 2 )
  {
    std::fill( crowd.begin(), crowd.end(), std::numeric_limits<double>::infinity() );
    return crowd;
  }
  const auto accumulate = [&]( auto key ) {
    std::vector<size_t> order( m );
    for ( size_t i = 0; i < m; ++i )
      order[i] = i;
    std::stable_sort( order.begin(), order.end(),
                      [&]( size_t a, size_t b ) { return key( points[front[a]] ) < key( points[front[b]] ); } );
    const double span = key( points[front[order.back()]] ) - key( points[front[order.front()]] );
    crowd[order.front()] = std::numeric_limits<double>::infinity();
    crowd[order.back()] = std::numeric_limits<double>::infinity();
    if ( span <= 0.0 )
      return;
    for ( size_t i = 1; i + 1 < m; ++i )
    {
      const double gap = key( points[front[order[i + 1]]] ) - key( points[front[order[i - 1]]] );
      if ( crowd[order[i]] != std::numeric_limits<double>::infinity() )
        crowd[order[i]] += gap / span;
    }
  };
  accumulate( []( objective_pair const& p ) { return p.loss; } );
  accumulate( []( objective_pair const& p ) { return p.area; } );
  return crowd;
}

/*! \brief Tournament order: lower rank wins, higher crowding breaks ties. */
inline bool crowded_less( size_t rank_a, double crowd_a, size_t rank_b, double crowd_b )
{
  if ( rank_a != rank_b )
    return rank_a < rank_b;
  return crowd_a > crowd_b;
}

} // namespace bespoke
