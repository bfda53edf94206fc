#pragma once

#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "adopt/common.hpp"

namespace adopt {

enum class AttributeType { Nominal, Real, Integer };

struct Attribute {
  std::string name;
  AttributeType type = AttributeType::Real;
};

struct AttributeSchema {
  std::vector<Attribute> attributes;

  std::size_t size() const { return attributes.size(); }

  /// Reads the JSON sidecar: {"attributes": [{"name": "...", "type": "nominal|real|integer"}, ...]}
  static AttributeSchema load_json(const std::string& path);
  void save_json(const std::string& path) const;
};

AttributeType parse_attribute_type(const std::string& s);
const char* to_string(AttributeType t);

/// Intrinsic characteristics of one entity at one week. Nominal values are
/// stored as interned integer codes so that equality is exact.
using CharacteristicVector = std::vector<double>;

struct AttributeRange {
  double min = 0.0;
  double max = 0.0;
};

struct Neighbor {
  Index index;
  double strength;
};

/// Running totals of the communications on one tie. For nondirectional
/// datasets `src < dst` and the series serves both directions.
struct CommunicationSeries {
  Index src;
  Index dst;
  std::vector<Week> weeks;          // strictly increasing
  std::vector<double> cumulative;   // total intensity through weeks[k]

  Week first_week() const { return weeks.front(); }
  /// Total intensity with timestamp <= t.
  double total_through(Week t) const;
};

struct ActionEvent {
  Index entity;
  ItemId item;
  Week week;
};

class Dataset;

/// Materialized view of the network at the end of one week.
class NetworkSnapshot {
 public:
  Week week() const { return week_; }
  bool directed() const { return directed_; }
  std::size_t size() const { return out_.size(); }

  /// Ties leaving i, sorted by neighbor index.
  std::span<const Neighbor> out_neighbors(Index i) const { return out_[i]; }
  /// Ties entering i; identical to out_neighbors for nondirectional networks.
  std::span<const Neighbor> in_neighbors(Index i) const { return directed_ ? in_[i] : out_[i]; }
  /// Entities tied to i in either direction, sorted.
  std::span<const Index> neighbors(Index i) const { return undirected_[i]; }

  /// x_ij^t; 0 when there is no tie from i to j.
  double strength(Index from, Index to) const;
  /// l_ab^t.
  bool has_tie(Index from, Index to) const;
  /// Tie in either direction.
  bool connected(Index a, Index b) const;
  double max_strength() const { return max_strength_; }

  const CharacteristicVector& characteristics(Index i) const { return traits_[i]; }
  const std::vector<AttributeRange>& ranges() const { return ranges_; }
  const AttributeSchema& schema() const { return *schema_; }

  bool adopted(Index i) const { return adoption_week_[i] != 0; }
  /// Adoption week if adopted by this snapshot's week, else 0.
  Week adoption_week(Index i) const { return adoption_week_[i]; }
  std::vector<Index> adopters() const;
  std::vector<Index> nonadopters() const;

 private:
  friend class Dataset;
  Week week_ = 0;
  bool directed_ = false;
  std::vector<std::vector<Neighbor>> out_;
  std::vector<std::vector<Neighbor>> in_;
  std::vector<std::vector<Index>> undirected_;
  double max_strength_ = 0.0;
  std::vector<CharacteristicVector> traits_;
  std::vector<AttributeRange> ranges_;
  const AttributeSchema* schema_ = nullptr;
  std::vector<Week> adoption_week_;
};

struct IngestOptions {
  bool directed = false;
  /// Last observed week; defaults to the largest week seen in the event files.
  std::optional<Week> horizon;
  /// Focal item; may be omitted when the adoption file carries a single item.
  std::optional<ItemId> item;
  /// Attribute schema sidecar; defaults to `<profiles stem>.schema.json`.
  std::string schema_path;
  /// Optional extra multi-item action log (`entity_id,item_id,week`).
  std::string actions_path;
};

/// Immutable, fully validated event data. Snapshots are materialized on demand.
class Dataset {
 public:
  std::size_t size() const { return ids_.size(); }
  const std::vector<EntityId>& ids() const { return ids_; }
  EntityId id(Index i) const { return ids_[i]; }
  std::optional<Index> index_of(EntityId id) const;

  bool directed() const { return directed_; }
  Week horizon() const { return horizon_; }
  ItemId focal_item() const { return focal_item_; }
  const AttributeSchema& schema() const { return schema_; }

  /// Adoption week of the focal item, 0 if the entity never adopts within the horizon.
  Week adoption_week(Index i) const { return adoption_week_[i]; }
  const std::vector<Week>& adoption_weeks() const { return adoption_week_; }
  /// Adoptions of every non-focal item.
  const std::vector<ActionEvent>& actions() const { return actions_; }
  const std::vector<CommunicationSeries>& series() const { return series_; }

  /// c_i^t: the latest profile row with week <= t (the earliest row if none precede t).
  const CharacteristicVector& characteristics_at(Index i, Week t) const;
  const std::string& nominal_label(std::size_t attribute, int code) const;

  /// Week-t view: ties, characteristics, and adopters as of the end of week t (0 <= t <= horizon).
  NetworkSnapshot snapshot(Week t) const;

  /// Copy with every event after week t removed and the horizon set to t.
  Dataset truncated(Week t) const;

 private:
  friend class DatasetBuilder;
  std::vector<EntityId> ids_;
  std::unordered_map<EntityId, Index> index_;
  bool directed_ = false;
  Week horizon_ = 0;
  ItemId focal_item_ = 0;
  AttributeSchema schema_;
  std::vector<std::vector<std::string>> nominal_labels_;
  std::vector<std::vector<std::pair<Week, CharacteristicVector>>> profiles_;
  std::vector<CommunicationSeries> series_;
  std::vector<Week> adoption_week_;
  std::vector<ActionEvent> actions_;
};

/// Programmatic construction with the same validation rules as file ingest.
class DatasetBuilder {
 public:
  DatasetBuilder(AttributeSchema schema, bool directed);

  /// Adds (or extends) an entity profile row. Values are textual, typed by the schema.
  void add_profile(EntityId id, Week week, const std::vector<std::string>& values);
  void add_entity(EntityId id);
  void add_communication(EntityId src, EntityId dst, Week week, double intensity);
  void add_adoption(EntityId id, ItemId item, Week week);

  Dataset build(std::optional<Week> horizon, std::optional<ItemId> focal_item) &&;

 private:
  Index require(EntityId id, const char* what) const;

  Dataset data_;
  struct RawComm {
    Index src, dst;
    Week week;
    double intensity;
  };
  std::vector<RawComm> comms_;
  struct RawAdoption {
    Index entity;
    ItemId item;
    Week week;
  };
  std::vector<RawAdoption> adoptions_;
  std::set<std::pair<EntityId, ItemId>> adopted_;
  std::vector<std::unordered_map<std::string, int>> nominal_codes_;
};

/// Reads communications, profiles, and adoption CSVs (see README for the formats).
Dataset ingest_events(const std::string& communications_file, const std::string& profiles_file,
                      const std::string& adoption_file, const IngestOptions& options = {});

}  // namespace adopt
