/* bespoke: hardwired-coefficient classifier circuits
 * Copyright (c) 2026 bespoke contributors
 * SPDX-License-Identifier: MIT
 */

/*!
  \file report.hpp
  \brief Evaluation records, relative-gain math, and battery feasibility

  An evaluation report carries one phase of one model: accuracy on the held
  out split, the area and power proxies of its netlist, and the relative
  gains against the exact hardwired baseline. When a mW-per-gate-equivalent
  calibration is supplied, the estimated power is checked against the three
  supply thresholds; without one the battery block is omitted with a note.
*/

#pragma once

#include <array>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"

namespace bespoke
{

struct battery_threshold
{
  const char* name;
  double mw;
};

/*! \brief Supply budgets a printed circuit may run from, largest first. */
inline constexpr std::array<battery_threshold, 3> battery_thresholds{
    { { "molex-30mw", 30.0 }, { "blue-spark-3mw", 3.0 }, { "harvester-0.1mw", 0.1 } } };

struct battery_report
{
  double calibration_mw_per_ge = 0.0;
  double estimated_mw = 0.0;
  std::vector<std::string> feasible_under;
};

/*! \brief Scales the power proxy into mW and flags every threshold the
 * estimate stays strictly below.
 */
inline battery_report battery_check( double power_proxy, double calibration_mw_per_ge )
{
  if ( !( calibration_mw_per_ge > 0.0 ) )
    throw validation_error( "battery", "calibration must be positive" );
  battery_report r;
  r.calibration_mw_per_ge = calibration_mw_per_ge;
  r.estimated_mw = power_proxy * calibration_mw_per_ge;
  for ( auto const& t : battery_thresholds )
  {
    if ( r.estimated_mw < t.mw )
      r.feasible_under.push_back( t.name );
  }
  return r;
}

inline constexpr const char* phase_exact = "exact-bespoke";
inline constexpr const char* phase_approximated = "approximated";

struct eval_report
{
  std::string model_id;
  std::string phase; /* phase_exact or phase_approximated */
  double accuracy_test = 0.0;
  double area_proxy = 0.0;
  double power_proxy = 0.0;
  double area_gain_pct = 0.0;  /* vs the exact hardwired circuit */
  double power_gain_pct = 0.0; /* vs the exact hardwired circuit */
  std::optional<battery_report> battery;
  std::optional<bool> oracle_equivalent; /* set when the phase ran the check */
};

/*! \brief Relative saving in percent; 0 when nothing changed, capped above
 * by 100 (a free circuit), unbounded below.
 */
inline double gain_pct( double exact_value, double approx_value )
{
  if ( exact_value == 0.0 && approx_value == 0.0 )
    return 0.0;
  if ( exact_value <= 0.0 )
    throw validation_error( "gain", "exact baseline must be positive" );
  return ( exact_value - approx_value ) / exact_value * 100.0;
}

inline nlohmann::json report_to_json( eval_report const& r )
{
  nlohmann::json j;
  j["model"] = r.model_id;
  j["phase"] = r.phase;
  j["accuracy_test"] = r.accuracy_test;
  j["area_proxy"] = r.area_proxy;
  j["power_proxy"] = r.power_proxy;
  j["area_gain_pct"] = r.area_gain_pct;
  j["power_gain_pct"] = r.power_gain_pct;
  if ( r.battery.has_value() )
  {
    j["battery"] = { { "calibration_mw_per_ge", r.battery->calibration_mw_per_ge },
                     { "estimated_mw", r.battery->estimated_mw },
                     { "feasible_under", r.battery->feasible_under } };
  }
  else
  {
    j["battery_note"] = "no calibration supplied; battery block omitted";
  }
  if ( r.oracle_equivalent.has_value() )
    j["oracle_equivalent"] = *r.oracle_equivalent;
  return j;
}

inline eval_report report_from_json( nlohmann::json const& j )
{
  eval_report r;
  r.model_id = j.at( "model" ).get<std::string>();
  r.phase = j.at( "phase" ).get<std::string>();
  r.accuracy_test = j.at( "accuracy_test" ).get<double>();
  r.area_proxy = j.at( "area_proxy" ).get<double>();
  r.power_proxy = j.at( "power_proxy" ).get<double>();
  r.area_gain_pct = j.at( "area_gain_pct" ).get<double>();
  r.power_gain_pct = j.at( "power_gain_pct" ).get<double>();
  if ( j.contains( "battery" ) )
  {
    battery_report b;
    b.calibration_mw_per_ge = j["battery"].at( "calibration_mw_per_ge" ).get<double>();
    b.estimated_mw = j["battery"].at( "estimated_mw" ).get<double>();
    b.feasible_under = j["battery"].at( "feasible_under" ).get<std::vector<std::string>>();
    r.battery = b;
  }
  if ( j.contains( "oracle_equivalent" ) )
    r.oracle_equivalent = j["oracle_equivalent"].get<bool>();
  return r;
}

namespace detail
{

inline std::string format_metric( double v )
{
  char buf[64];
  std::snprintf( buf, sizeof buf, "%.10g", v );
  return buf;
}

} // namespace detail

/*! \brief One row per report: accuracy, area, power, and the two gains. */
inline std::string summary_csv( std::vector<eval_report> const& reports )
{
  std::string out = "model,phase,Ac,A,P,AG,PG\n";
  for ( auto const& r : reports )
  {
    out += r.model_id;
    out += ',';
    out += r.phase;
    out += ',';
    out += detail::format_metric( r.accuracy_test );
    out += ',';
    out += detail::format_metric( r.area_proxy );
    out += ',';
    out += detail::format_metric( r.power_proxy );
    out += ',';
    out += detail::format_metric( r.area_gain_pct );
    out += ',';
    out += detail::format_metric( r.power_gain_pct );
    out += '\n';
  }
  return out;
}

} // namespace bespoke
