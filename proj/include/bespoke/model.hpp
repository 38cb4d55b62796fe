/* bespoke: hardwired-coefficient classifier circuits
 * Copyright (c) 2026 bespoke contributors
 * SPDX-License-Identifier: MIT
 */

/*!
  \file model.hpp
  \brief Trained-model schema: MLP, one-vs-one SVM, and decision tree

  Models are declarative coefficient dumps produced by an external training
  step. Inputs are expected to be min-max normalized per feature; the
  quantization stage maps raw dataset columns into that domain.
*/

#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "errors.hpp"

namespace bespoke
{

enum class model_kind
{
  mlp_classifier,
  mlp_regressor,
  svm_classifier,
  decision_tree
};

inline std::string to_string( model_kind k )
{
  switch ( k )
  {
  case model_kind::mlp_classifier:
    return "mlp-classifier";
  case model_kind::mlp_regressor:
    return "mlp-regressor";
  case model_kind::svm_classifier:
    return "svm-classifier";
  default:
    return "decision-tree";
  }
}

enum class activation
{
  relu,
  none
};

/*! \brief One dense layer: `weights[o][i]` maps input i to output o. */
struct mlp_layer
{
  std::vector<std::vector<double>> weights;
  std::vector<double> bias;
  activation act = activation::relu;

  size_t input_width() const { return weights.empty() ? 0 : weights.front().size(); }
  size_t output_width() const { return weights.size(); }
};

struct mlp_body
{
  std::vector<mlp_layer> layers;
};

/*! \brief One binary linear classifier of a one-vs-one SVM.
 *
 * Votes for `positive_class` when w.x + b >= 0, else for `negative_class`.
 */
struct svm_unit
{
  std::vector<double> weights;
  double bias = 0.0;
  int positive_class = 0;
  int negative_class = 0;
};

struct svm_body
{
  std::vector<svm_unit> units;
};

/*! \brief Decision-tree node. Internal nodes branch right when
 * feature >= threshold; leaves carry a class label.
 */
struct tree_node
{
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int label = -1;

  bool is_leaf() const { return label >= 0; }
};

struct tree_body
{
  std::vector<tree_node> nodes;
  int root = 0;
};

struct trained_model
{
  model_kind kind = model_kind::decision_tree;
  int input_count = 0;
  int class_count = 0;
  std::variant<mlp_body, svm_body, tree_body> body;

  mlp_body const& mlp() const { return std::get<mlp_body>( body ); }
  svm_body const& svm() const { return std::get<svm_body>( body ); }
  tree_body const& tree() const { return std::get<tree_body>( body ); }
  bool is_mlp() const { return std::holds_alternative<mlp_body>( body ); }
};

namespace detail
{

inline model_kind parse_kind( std::string const& s )
{
  if ( s == "mlp-classifier" )
    return model_kind::mlp_classifier;
  if ( s == "mlp-regressor" )
    return model_kind::mlp_regressor;
  if ( s == "svm-classifier" )
    return model_kind::svm_classifier;
  if ( s == "decision-tree" )
    return model_kind::decision_tree;
  throw validation_error( "kind", "unknown model kind '" + s + "'" );
}

inline std::vector<double> parse_real_vector( nlohmann::json const& j, std::string const& path )
{
  if ( !j.is_array() )
    throw validation_error( path, "expected an array of numbers" );
  std::vector<double> out;
  out.reserve( j.size() );
  for ( size_t i = 0; i < j.size(); ++i )
  {
    if ( !j[i].is_number() )
      throw validation_error( path + "[" + std::to_string( i ) + "]", "expected a number" );
    out.push_back( j[i].get<double>() );
  }
  return out;
}

} // namespace detail

/*! \brief Checks every structural invariant of a model; throws
 * `validation_error` naming the offending field on the first violation.
 */
inline void validate_model( trained_model const& m )
{
  if ( m.input_count <= 0 )
    throw validation_error( "inputs", "must be a positive integer" );
  if ( m.class_count < 2 )
    throw validation_error( "classes", "must be at least 2" );

  if ( m.is_mlp() )
  {
    auto const& layers = m.mlp().layers;
    if ( layers.empty() )
      throw validation_error( "mlp.layers", "at least one layer required" );
    size_t expected_in = static_cast<size_t>( m.input_count );
    for ( size_t l = 0; l < layers.size(); ++l )
    {
      const std::string lp = "mlp.layers[" + std::to_string( l ) + "]";
      auto const& layer = layers[l];
      if ( layer.weights.empty() )
        throw validation_error( lp + ".weights", "empty weight matrix" );
      for ( size_t r = 0; r < layer.weights.size(); ++r )
      {
        if ( layer.weights[r].size() != expected_in )
          throw validation_error( lp + ".weights",
                                  "row " + std::to_string( r ) + " has " + std::to_string( layer.weights[r].size() ) +
                                      " columns, expected " + std::to_string( expected_in ) );
      }
      if ( layer.bias.size() != layer.output_width() )
        throw validation_error( lp + ".bias", "expected " + std::to_string( layer.output_width() ) +
                                                  " entries, got " + std::to_string( layer.bias.size() ) );
      expected_in = layer.output_width();
    }
    const size_t last = layers.back().output_width();
    const size_t want = m.kind == model_kind::mlp_regressor ? 1 : static_cast<size_t>( m.class_count );
    if ( last != want )
      throw validation_error( "mlp.layers[" + std::to_string( layers.size() - 1 ) + "].weights",
                              "final width " + std::to_string( last ) + ", expected " + std::to_string( want ) );
  }
  else if ( std::holds_alternative<svm_body>( m.body ) )
  {
    auto const& units = m.svm().units;
    const size_t k = static_cast<size_t>( m.class_count );
    const size_t expected = k * ( k - 1 ) / 2;
    if ( units.size() != expected )
      throw validation_error( "svm.classifiers", "expected " + std::to_string( expected ) +
                                                     " binary classifiers for " + std::to_string( k ) +
                                                     " classes, got " + std::to_string( units.size() ) );
    std::vector<bool> seen( k * k, false );
    for ( size_t u = 0; u < units.size(); ++u )
    {
      const std::string up = "svm.classifiers[" + std::to_string( u ) + "]";
      auto const& unit = units[u];
      if ( unit.weights.size() != static_cast<size_t>( m.input_count ) )
        throw validation_error( up + ".weights", "expected " + std::to_string( m.input_count ) + " weights" );
      if ( unit.positive_class < 0 || unit.positive_class >= m.class_count )
        throw validation_error( up + ".positive_class", "class index out of range" );
      if ( unit.negative_class < 0 || unit.negative_class >= m.class_count )
        throw validation_error( up + ".negative_class", "class index out of range" );
      if ( unit.positive_class == unit.negative_class )
        throw validation_error( up, "positive and negative class must differ" );
      const size_t a = static_cast<size_t>( std::min( unit.positive_class, unit.negative_class ) );
      const size_t b = static_cast<size_t>( std::max( unit.positive_class, unit.negative_class ) );
      if ( seen[a * k + b] )
        throw validation_error( up, "duplicate class pair" );
      seen[a * k + b] = true;
    }
  }
  else
  {
    auto const& t = m.tree();
    if ( t.nodes.empty() )
      throw validation_error( "tree.nodes", "empty node array" );
    const int n = static_cast<int>( t.nodes.size() );
    std::vector<int> indegree( t.nodes.size(), 0 );
    for ( size_t i = 0; i < t.nodes.size(); ++i )
    {
      const std::string np = "tree.nodes[" + std::to_string( i ) + "]";
      auto const& node = t.nodes[i];
      if ( node.is_leaf() )
      {
        if ( node.label >= m.class_count )
          throw validation_error( np + ".class", "leaf label exceeds class count" );
        continue;
      }
      if ( node.feature < 0 || node.feature >= m.input_count )
        throw validation_error( np + ".feature", "feature index out of range" );
      for ( int child : { node.left, node.right } )
      {
        if ( child < 0 || child >= n )
          throw validation_error( np, "dangling child id " + std::to_string( child ) );
        ++indegree[static_cast<size_t>( child )];
      }
    }
    if ( t.root < 0 || t.root >= n )
      throw validation_error( "tree", "missing root node" );
    /* rooted binary tree: root has indegree 0, every other node exactly 1 */
    for ( size_t i = 0; i < t.nodes.size(); ++i )
    {
      if ( static_cast<int>( i ) == t.root )
      {
        if ( indegree[i] != 0 )
          throw validation_error( "tree.nodes[" + std::to_string( i ) + "]", "root is referenced as a child" );
      }
      else if ( indegree[i] != 1 )
      {
        throw validation_error( "tree.nodes[" + std::to_string( i ) + "]",
                                indegree[i] == 0 ? "unreachable node" : "node has multiple parents" );
      }
    }
    /* acyclicity follows from the indegree argument plus reachability */
  }
}

/*! \brief Parses a model from its JSON form. */
inline trained_model model_from_json( nlohmann::json const& j )
{
  trained_model m;
  if ( !j.contains( "kind" ) || !j["kind"].is_string() )
    throw validation_error( "kind", "missing or not a string" );
  m.kind = detail::parse_kind( j["kind"].get<std::string>() );
  if ( !j.contains( "inputs" ) || !j["inputs"].is_number_integer() )
    throw validation_error( "inputs", "missing or not an integer" );
  if ( !j.contains( "classes" ) || !j["classes"].is_number_integer() )
    throw validation_error( "classes", "missing or not an integer" );
  m.input_count = j["inputs"].get<int>();
  m.class_count = j["classes"].get<int>();

  const bool want_mlp = m.kind == model_kind::mlp_classifier || m.kind == model_kind::mlp_regressor;
  const char* body_key = want_mlp ? "mlp" : ( m.kind == model_kind::svm_classifier ? "svm" : "tree" );
  for ( const char* key : { "mlp", "svm", "tree" } )
  {
    if ( j.contains( key ) && std::string( key ) != body_key )
      throw validation_error( key, std::string( "body does not match kind '" ) + to_string( m.kind ) + "'" );
  }
  if ( !j.contains( body_key ) )
    throw validation_error( body_key, "missing body" );

  if ( want_mlp )
  {
    mlp_body body;
    auto const& jm = j["mlp"];
    if ( !jm.contains( "layers" ) || !jm["layers"].is_array() )
      throw validation_error( "mlp.layers", "missing or not an array" );
    for ( size_t l = 0; l < jm["layers"].size(); ++l )
    {
      const std::string lp = "mlp.layers[" + std::to_string( l ) + "]";
      auto const& jl = jm["layers"][l];
      mlp_layer layer;
      if ( !jl.contains( "weights" ) || !jl["weights"].is_array() )
        throw validation_error( lp + ".weights", "missing or not an array" );
      for ( size_t r = 0; r < jl["weights"].size(); ++r )
      {
        layer.weights.push_back( detail::parse_real_vector( jl["weights"][r], lp + ".weights[" + std::to_string( r ) + "]" ) );
      }
      if ( !jl.contains( "bias" ) )
        throw validation_error( lp + ".bias", "missing" );
      layer.bias = detail::parse_real_vector( jl["bias"], lp + ".bias" );
      if ( jl.contains( "activation" ) )
      {
        const std::string a = jl["activation"].get<std::string>();
        if ( a == "relu" )
          layer.act = activation::relu;
        else if ( a == "none" )
          layer.act = activation::none;
        else
          throw validation_error( lp + ".activation", "expected 'relu' or 'none'" );
      }
      body.layers.push_back( std::move( layer ) );
    }
    m.body = std::move( body );
  }
  else if ( m.kind == model_kind::svm_classifier )
  {
    svm_body body;
    auto const& js = j["svm"];
    if ( !js.contains( "classifiers" ) || !js["classifiers"].is_array() )
      throw validation_error( "svm.classifiers", "missing or not an array" );
    for ( size_t u = 0; u < js["classifiers"].size(); ++u )
    {
      const std::string up = "svm.classifiers[" + std::to_string( u ) + "]";
      auto const& ju = js["classifiers"][u];
      svm_unit unit;
      unit.weights = detail::parse_real_vector( ju.contains( "weights" ) ? ju["weights"] : nlohmann::json{}, up + ".weights" );
      if ( !ju.contains( "bias" ) || !ju["bias"].is_number() )
        throw validation_error( up + ".bias", "missing or not a number" );
      unit.bias = ju["bias"].get<double>();
      if ( !ju.contains( "positive_class" ) || !ju.contains( "negative_class" ) )
        throw validation_error( up, "missing positive_class/negative_class" );
      unit.positive_class = ju["positive_class"].get<int>();
      unit.negative_class = ju["negative_class"].get<int>();
      body.units.push_back( std::move( unit ) );
    }
    m.body = std::move( body );
  }
  else
  {
    tree_body body;
    auto const& jt = j["tree"];
    if ( !jt.contains( "nodes" ) || !jt["nodes"].is_array() )
      throw validation_error( "tree.nodes", "missing or not an array" );
    /* nodes are addressed by their explicit ids */
    std::vector<std::pair<int, tree_node>> raw;
    int max_id = -1;
    for ( size_t i = 0; i < jt["nodes"].size(); ++i )
    {
      const std::string np = "tree.nodes[" + std::to_string( i ) + "]";
      auto const& jn = jt["nodes"][i];
      if ( !jn.contains( "id" ) || !jn["id"].is_number_integer() )
        throw validation_error( np + ".id", "missing or not an integer" );
      const int id = jn["id"].get<int>();
      if ( id < 0 )
        throw validation_error( np + ".id", "negative id" );
      tree_node node;
      if ( jn.contains( "class" ) )
      {
        node.label = jn["class"].get<int>();
        if ( node.label < 0 )
          throw validation_error( np + ".class", "negative class label" );
      }
      else
      {
        for ( const char* key : { "feature", "threshold", "left", "right" } )
        {
          if ( !jn.contains( key ) )
            throw validation_error( np, std::string( "internal node missing '" ) + key + "'" );
        }
        node.feature = jn["feature"].get<int>();
        node.threshold = jn["threshold"].get<double>();
        node.left = jn["left"].get<int>();
        node.right = jn["right"].get<int>();
      }
      max_id = std::max( max_id, id );
      raw.emplace_back( id, node );
    }
    if ( raw.empty() )
      throw validation_error( "tree.nodes", "empty node array" );
    body.nodes.assign( static_cast<size_t>( max_id ) + 1, tree_node{} );
    std::vector<bool> present( body.nodes.size(), false );
    for ( auto const& [id, node] : raw )
    {
      if ( present[static_cast<size_t>( id )] )
        throw validation_error( "tree.nodes", "duplicate id " + std::to_string( id ) );
      present[static_cast<size_t>( id )] = true;
      body.nodes[static_cast<size_t>( id )] = node;
    }
    for ( size_t i = 0; i < present.size(); ++i )
    {
      if ( !present[i] )
        throw validation_error( "tree.nodes", "missing id " + std::to_string( i ) );
    }
    /* root: the unique node never referenced as a child */
    std::vector<bool> is_child( body.nodes.size(), false );
    for ( auto const& node : body.nodes )
    {
      if ( !node.is_leaf() )
      {
        for ( int c : { node.left, node.right } )
        {
          if ( c >= 0 && c < static_cast<int>( body.nodes.size() ) )
            is_child[static_cast<size_t>( c )] = true;
        }
      }
    }
    body.root = -1;
    for ( size_t i = 0; i < body.nodes.size(); ++i )
    {
      if ( !is_child[i] )
      {
        if ( body.root >= 0 )
          throw validation_error( "tree.nodes", "multiple roots (ids " + std::to_string( body.root ) + ", " +
                                                    std::to_string( i ) + ")" );
        body.root = static_cast<int>( i );
      }
    }
    m.body = std::move( body );
  }

  validate_model( m );
  return m;
}

/*! \brief Serializes a model; `model_from_json` round-trips it field-by-field. */
inline nlohmann::json model_to_json( trained_model const& m )
{
  nlohmann::json j;
  j["kind"] = to_string( m.kind );
  j["inputs"] = m.input_count;
  j["classes"] = m.class_count;
  if ( m.is_mlp() )
  {
    nlohmann::json layers = nlohmann::json::array();
    for ( auto const& layer : m.mlp().layers )
    {
      nlohmann::json jl;
      jl["weights"] = layer.weights;
      jl["bias"] = layer.bias;
      jl["activation"] = layer.act == activation::relu ? "relu" : "none";
      layers.push_back( std::move( jl ) );
    }
    j["mlp"]["layers"] = std::move( layers );
  }
  else if ( std::holds_alternative<svm_body>( m.body ) )
  {
    nlohmann::json units = nlohmann::json::array();
    for ( auto const& unit : m.svm().units )
    {
      units.push_back( { { "weights", unit.weights },
                         { "bias", unit.bias },
                         { "positive_class", unit.positive_class },
                         { "negative_class", unit.negative_class } } );
    }
    j["svm"]["classifiers"] = std::move( units );
  }
  else
  {
    nlohmann::json nodes = nlohmann::json::array();
    for ( size_t i = 0; i < m.tree().nodes.size(); ++i )
    {
      auto const& node = m.tree().nodes[i];
      if ( node.is_leaf() )
        nodes.push_back( { { "id", i }, { "class", node.label } } );
      else
        nodes.push_back( { { "id", i },
                           { "feature", node.feature },
                           { "threshold", node.threshold },
                           { "left", node.left },
                           { "right", node.right } } );
    }
    j["tree"]["nodes"] = std::move( nodes );
  }
  return j;
}

/*! \brief Loads and validates a model file. */
inline trained_model load_model( std::string const& path )
{
  std::ifstream in( path );
  if ( !in )
    throw validation_error( path, "cannot open model file" );
  nlohmann::json j;
  try
  {
    in >> j;
  }
  catch ( nlohmann::json::parse_error const& e )
  {
    throw validation_error( path, std::string( "JSON parse failure: " ) + e.what() );
  }
  return model_from_json( j );
}

inline void save_model( trained_model const& m, std::string const& path )
{
  std::ofstream out( path );
  if ( !out )
    throw validation_error( path, "cannot write model file" );
  out << model_to_json( m ).dump( 2 ) << "\n";
}

} // namespace bespoke
