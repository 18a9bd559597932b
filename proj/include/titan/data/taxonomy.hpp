#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace titan::data {

// Fixed hierarchical action label sets: five person sets followed by three
// vehicle sets.  Head cardinalities are 10, 13, 7, 4, 4, 4, 3, 3; every set
// contains exactly one "none" class.  Classifier head shapes, action-vector
// normalization, and report label names all derive from this table.

inline constexpr int kNumActionSets = 8;
inline constexpr int kNumPersonSets = 5;
inline constexpr std::array<int, kNumActionSets> kSetCardinality = {10, 13, 7, 4, 4, 4, 3, 3};

enum class ActionSet {
  atomic = 0,
  simple_contextual = 1,
  complex_contextual = 2,
  communicative = 3,
  transportive = 4,
  motion_status = 5,
  trunk_status = 6,
  door_status = 7,
};

enum class AgentType { person = 0, vehicle_2wheel = 1, vehicle_4wheel = 2 };
enum class AgeGroup { child = 0, adult = 1, senior = 2 };

struct Taxonomy {
  struct LabelSet {
    std::string name;
    std::vector<std::string> classes;
    int none_index;  // position of the "none" class
  };

  std::array<LabelSet, kNumActionSets> sets;

  static const Taxonomy& get();

  const LabelSet& set(ActionSet s) const { return sets[static_cast<int>(s)]; }
  int cardinality(int set_index) const {
    return static_cast<int>(sets[set_index].classes.size());
  }
  int none_index(int set_index) const { return sets[set_index].none_index; }

  // Index of a class name within a set; -1 if absent.
  int class_index(ActionSet s, std::string_view class_name) const;
};

bool is_person(AgentType t);
bool is_vehicle(AgentType t);

std::string_view agent_type_name(AgentType t);
std::string_view age_group_name(AgeGroup g);

// Parse helpers; return false on unknown names.
bool parse_agent_type(std::string_view name, AgentType& out);
bool parse_age_group(std::string_view name, AgeGroup& out);

}  // namespace titan::data
