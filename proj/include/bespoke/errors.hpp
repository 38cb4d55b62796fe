/* bespoke: hardwired-coefficient classifier circuits
 * Copyright (c) 2026 bespoke contributors
 * SPDX-License-Identifier: MIT
 */

/*!
  \file errors.hpp
  \brief Error types shared across the library
*/

#pragma once

#include <stdexcept>
#include <string>

namespace bespoke
{

/*! \brief Raised when an input file or in-memory structure violates its schema.
 *
 * `path()` names the offending field (e.g. `mlp.layers[1].weights`), so CLI
 * messages can point at the exact location in a model or dataset file.
 */
class validation_error : public std::runtime_error
{
public:
  validation_error( std::string field_path, std::string const& message )
      : std::runtime_error( field_path + ": " + message ), path_( std::move( field_path ) )
  {
  }

  std::string const& path() const noexcept { return path_; }

private:
  std::string path_;
};

/*! \brief Raised when simulation inputs do not match a netlist's ports. */
class simulation_error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

} // namespace bespoke
