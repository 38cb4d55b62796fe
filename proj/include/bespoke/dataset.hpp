/* bespoke: hardwired-coefficient classifier circuits
 * Copyright (c) 2026 bespoke contributors
 * SPDX-License-Identifier: MIT
 */

/*!
  \file dataset.hpp
  \brief CSV datasets and deterministic stratified splits

  Feature ranges are recorded once, when a file is loaded, and copied to
  both partitions of a split. The input quantizer is therefore always fit
  on the loaded training source, never on a test partition.
*/

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"

namespace bespoke
{

struct dataset
{
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::vector<std::pair<double, double>> feature_ranges;
  int class_count = 0;

  size_t size() const { return rows.size(); }
  size_t feature_count() const { return feature_ranges.size(); }
};

namespace detail
{

inline double parse_cell( std::string const& cell, std::string const& where )
{
  double value = 0.0;
  auto const* begin = cell.data();
  auto const* end = cell.data() + cell.size();
  while ( begin != end && ( *begin == ' ' || *begin == '\t' ) )
    ++begin;
  while ( end != begin && ( *( end - 1 ) == ' ' || *( end - 1 ) == '\t' || *( end - 1 ) == '\r' ) )
    --end;
  auto [ptr, ec] = std::from_chars( begin, end, value );
  if ( ec != std::errc{} || ptr != end || begin == end )
    throw validation_error( where, "non-numeric cell '" + cell + "'" );
  return value;
}

inline std::vector<std::string> split_line( std::string const& line )
{
  std::vector<std::string> cells;
  size_t start = 0;
  while ( true )
  {
    const size_t comma = line.find( ',', start );
    if ( comma == std::string::npos )
    {
      cells.push_back( line.substr( start ) );
      break;
    }
    cells.push_back( line.substr( start, comma - start ) );
    start = comma + 1;
  }
  return cells;
}

} // namespace detail

/*! \brief Loads a CSV with a header row: `expected_inputs` feature columns
 * followed by one integer label column. Feature ranges come from the file's
 * own rows.
 */
inline dataset load_dataset( std::string const& path, int expected_inputs, int expected_classes )
{
  if ( expected_inputs <= 0 )
    throw validation_error( path, "expected_inputs must be positive" );
  std::ifstream in( path );
  if ( !in )
    throw validation_error( path, "cannot open dataset file" );

  dataset d;
  d.class_count = expected_classes;
  d.feature_ranges.assign( static_cast<size_t>( expected_inputs ),
                           { std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity() } );

  std::string line;
  if ( !std::getline( in, line ) )
    throw validation_error( path, "missing header row" );

  size_t row_index = 0;
  while ( std::getline( in, line ) )
  {
    if ( line.empty() || line == "\r" )
      continue;
    const std::string where = path + ":row " + std::to_string( row_index );
    auto cells = detail::split_line( line );
    if ( cells.size() != static_cast<size_t>( expected_inputs ) + 1 )
      throw validation_error( where, "expected " + std::to_string( expected_inputs + 1 ) + " columns, got " +
                                         std::to_string( cells.size() ) );
    std::vector<double> row( static_cast<size_t>( expected_inputs ) );
    for ( int c = 0; c < expected_inputs; ++c )
    {
      row[static_cast<size_t>( c )] = detail::parse_cell( cells[static_cast<size_t>( c )], where + ":col " + std::to_string( c ) );
    }
    const double raw_label = detail::parse_cell( cells.back(), where + ":label" );
    const int label = static_cast<int>( raw_label );
    if ( static_cast<double>( label ) != raw_label || label < 0 || label >= expected_classes )
      throw validation_error( where + ":label", "label out of range (valid labels 0.." +
                                                    std::to_string( expected_classes - 1 ) + ")" );
    for ( int c = 0; c < expected_inputs; ++c )
    {
      auto& [lo, hi] = d.feature_ranges[static_cast<size_t>( c )];
      lo = std::min( lo, row[static_cast<size_t>( c )] );
      hi = std::max( hi, row[static_cast<size_t>( c )] );
    }
    d.rows.push_back( std::move( row ) );
    d.labels.push_back( label );
    ++row_index;
  }
  if ( d.rows.size() < 2 )
    throw validation_error( path, "dataset needs at least 2 rows" );
  return d;
}

struct split_result
{
  dataset train;
  dataset test;
  bool stratified = true; /* false: fell back to an unstratified split */
};

/*! \brief Deterministic train/test split, stratified by label when every
 * class has at least 2 rows.
 *
 * The test partition holds round(n * test_fraction) rows, apportioned over
 * classes by largest remainder. Both partitions inherit the parent's
 * feature ranges.
 */
inline split_result split( dataset const& d, double test_fraction, uint64_t seed )
{
  if ( !( test_fraction > 0.0 && test_fraction < 1.0 ) )
    throw validation_error( "test_fraction", "must lie in (0,1)" );
  const size_t n = d.size();
  const size_t test_total = static_cast<size_t>( std::llround( static_cast<double>( n ) * test_fraction ) );
  if ( test_total == 0 || test_total >= n )
    throw validation_error( "test_fraction", "a partition is empty after rounding" );

  std::vector<size_t> class_counts( static_cast<size_t>( d.class_count ), 0 );
  for ( int label : d.labels )
    ++class_counts[static_cast<size_t>( label )];
  bool stratify = true;
  for ( size_t c = 0; c < class_counts.size(); ++c )
  {
    if ( class_counts[c] > 0 && class_counts[c] < 2 )
    {
      stratify = false;
      break;
    }
  }

  std::vector<size_t> test_indices;
  std::mt19937_64 rng( derive_seed( seed, "dataset-split" ) );

  if ( stratify )
  {
    /* largest-remainder apportionment of test_total over classes */
    std::vector<size_t> quota_floor( class_counts.size(), 0 );
    std::vector<std::pair<double, size_t>> remainders;
    size_t assigned = 0;
    for ( size_t c = 0; c < class_counts.size(); ++c )
    {
      const double quota = static_cast<double>( class_counts[c] ) * static_cast<double>( test_total ) / static_cast<double>( n );
      quota_floor[c] = static_cast<size_t>( std::floor( quota ) );
      quota_floor[c] = std::min( quota_floor[c], class_counts[c] );
      assigned += quota_floor[c];
      remainders.push_back( { quota - std::floor( quota ), c } );
    }
    std::sort( remainders.begin(), remainders.end(), []( auto const& a, auto const& b ) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    } );
    for ( auto const& [rem, c] : remainders )
    {
      if ( assigned >= test_total )
        break;
      if ( quota_floor[c] < class_counts[c] )
      {
        ++quota_floor[c];
        ++assigned;
      }
    }
    for ( size_t c = 0; c < class_counts.size(); ++c )
    {
      if ( class_counts[c] == 0 )
        continue;
      std::vector<size_t> members;
      for ( size_t i = 0; i < n; ++i )
      {
        if ( static_cast<size_t>( d.labels[i] ) == c )
          members.push_back( i );
      }
      deterministic_shuffle( members, rng );
      for ( size_t k = 0; k < quota_floor[c]; ++k )
        test_indices.push_back( members[k] );
    }
  }
  else
  {
    std::vector<size_t> order( n );
    std::iota( order.begin(), order.end(), size_t{ 0 } );
    deterministic_shuffle( order, rng );
    test_indices.assign( order.begin(), order.begin() + static_cast<long>( test_total ) );
  }

  std::vector<bool> in_test( n, false );
  for ( size_t i : test_indices )
    in_test[i] = true;

  split_result r;
  r.stratified = stratify;
  for ( dataset* part : { &r.train, &r.test } )
  {
    part->feature_ranges = d.feature_ranges;
    part->class_count = d.class_count;
  }
  for ( size_t i = 0; i < n; ++i )
  {
    dataset& part = in_test[i] ? r.test : r.train;
    part.rows.push_back( d.rows[i] );
    part.labels.push_back( d.labels[i] );
  }
  return r;
}

} // namespace bespoke
