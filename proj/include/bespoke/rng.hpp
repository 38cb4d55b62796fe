/* bespoke: hardwired-coefficient classifier circuits
 * Copyright (c) 2026 bespoke contributors
 * SPDX-License-Identifier: MIT
 */

/*!
  \file rng.hpp
  \brief Deterministic random streams derived from a single master seed

  Every random choice in the library flows from one user-supplied seed.
  Child streams are derived by hashing the seed together with a purpose
  tag and optional indices, so adding parallelism never changes results.
*/

#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace bespoke
{

/*! \brief One step of the splitmix64 generator; used as a seed mixer. */
inline uint64_t splitmix64( uint64_t x )
{
  x += 0x9e3779b97f4a7c15ULL;
  x = ( x ^ ( x >> 30 ) ) * 0xbf58476d1ce4e5b9ULL;
  x = ( x ^ ( x >> 27 ) ) * 0x94d049bb133111ebULL;
  return x ^ ( x >> 31 );
}

/*! \brief FNV-1a over a string tag, for labeling derived streams. */
inline uint64_t hash_tag( std::string_view tag )
{
  uint64_t h = 1469598103934665603ULL;
  for ( char c : tag )
  {
    h ^= static_cast<uint8_t>( c );
    h *= 1099511628211ULL;
  }
  return h;
}

/*! \brief Derives a child seed from (master, purpose tag, indices). */
inline uint64_t derive_seed( uint64_t master, std::string_view tag, uint64_t i = 0, uint64_t j = 0 )
{
  uint64_t h = splitmix64( master ^ hash_tag( tag ) );
  h = splitmix64( h ^ i );
  return splitmix64( h ^ j );
}

/*! \brief Uniform integer in [0, bound) with no modulo bias. */
inline uint64_t uniform_below( std::mt19937_64& rng, uint64_t bound )
{
  /* rejection sampling on the top of the range */
  const uint64_t limit = std::numeric_limits<uint64_t>::max() - std::numeric_limits<uint64_t>::max() % bound;
  uint64_t v = rng();
  while ( v >= limit )
  {
    v = rng();
  }
  return v % bound;
}

/*! \brief Fisher-Yates shuffle with explicit index draws.
 *
 * `std::shuffle` leaves the draw sequence unspecified; this pins it so a
 * given seed produces the same permutation on every standard library.
 */
template<typename T>
void deterministic_shuffle( std::vector<T>& v, std::mt19937_64& rng )
{
  for ( size_t i = v.size(); i > 1; --i )
  {
    const size_t j = static_cast<size_t>( uniform_below( rng, i ) );
    std::swap( v[i - 1], v[j] );
  }
}

} // namespace bespoke
