#include "adopt/network.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <set>

#include "json.hpp"

#include "adopt/csv.hpp"

namespace adopt {

// ---------------------------------------------------------------- schema

AttributeType parse_attribute_type(const std::string& s) {
  if (s == "nominal") return AttributeType::Nominal;
  if (s == "real") return AttributeType::Real;
  if (s == "integer") return AttributeType::Integer;
  throw ValidationError("unknown attribute type '" + s + "' (expected nominal|real|integer)");
}

const char* to_string(AttributeType t) {
  switch (t) {
    case AttributeType::Nominal: return "nominal";
    case AttributeType::Real: return "real";
    case AttributeType::Integer: return "integer";
  }
  return "real";
}

AttributeSchema AttributeSchema::load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open schema " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("schema " + path + ": " + e.what());
  }
  AttributeSchema schema;
  if (!doc.contains("attributes") || !doc["attributes"].is_array())
    throw ValidationError("schema " + path + ": missing 'attributes' array");
  for (const auto& a : doc["attributes"]) {
    Attribute attr;
    attr.name = a.value("name", std::string("attr_") + std::to_string(schema.size() + 1));
    attr.type = parse_attribute_type(a.at("type").get<std::string>());
    schema.attributes.push_back(std::move(attr));
  }
  return schema;
}

void AttributeSchema::save_json(const std::string& path) const {
  nlohmann::json doc;
  doc["attributes"] = nlohmann::json::array();
  for (const auto& a : attributes) doc["attributes"].push_back({{"name", a.name}, {"type", to_string(a.type)}});
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << doc.dump(2) << '\n';
}

// ---------------------------------------------------------------- series

double CommunicationSeries::total_through(Week t) const {
  auto it = std::upper_bound(weeks.begin(), weeks.end(), t);
  if (it == weeks.begin()) return 0.0;
  return cumulative[static_cast<std::size_t>(it - weeks.begin()) - 1];
}

// ---------------------------------------------------------------- snapshot

namespace {

const Neighbor* find_neighbor(const std::vector<Neighbor>& list, Index j) {
  auto it = std::lower_bound(list.begin(), list.end(), j,
                             [](const Neighbor& n, Index v) { return n.index < v; });
  return (it != list.end() && it->index == j) ? &*it : nullptr;
}

}  // namespace

double NetworkSnapshot::strength(Index from, Index to) const {
  const Neighbor* n = find_neighbor(out_[from], to);
  return n ? n->strength : 0.0;
}

bool NetworkSnapshot::has_tie(Index from, Index to) const { return find_neighbor(out_[from], to) != nullptr; }

bool NetworkSnapshot::connected(Index a, Index b) const {
  const auto& list = undirected_[a];
  return std::binary_search(list.begin(), list.end(), b);
}

std::vector<Index> NetworkSnapshot::adopters() const {
  std::vector<Index> out;
  for (Index i = 0; i < adoption_week_.size(); ++i)
    if (adoption_week_[i] != 0) out.push_back(i);
  return out;
}

std::vector<Index> NetworkSnapshot::nonadopters() const {
  std::vector<Index> out;
  for (Index i = 0; i < adoption_week_.size(); ++i)
    if (adoption_week_[i] == 0) out.push_back(i);
  return out;
}

// ---------------------------------------------------------------- dataset

std::optional<Index> Dataset::index_of(EntityId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const CharacteristicVector& Dataset::characteristics_at(Index i, Week t) const {
  const auto& rows = profiles_[i];
  auto it = std::upper_bound(rows.begin(), rows.end(), t,
                             [](Week w, const auto& row) { return w < row.first; });
  if (it == rows.begin()) return rows.front().second;
  return std::prev(it)->second;
}

const std::string& Dataset::nominal_label(std::size_t attribute, int code) const {
  return nominal_labels_.at(attribute).at(static_cast<std::size_t>(code));
}

NetworkSnapshot Dataset::snapshot(Week t) const {
  if (t < 0 || t > horizon_)
    throw ValidationError("snapshot week " + std::to_string(t) + " outside [0, " +
                          std::to_string(horizon_) + "]");
  const std::size_t n = size();
  NetworkSnapshot s;
  s.week_ = t;
  s.directed_ = directed_;
  s.schema_ = &schema_;
  s.out_.assign(n, {});
  if (directed_) s.in_.assign(n, {});
  s.undirected_.assign(n, {});

  if (t >= 1) {
    for (const auto& series : series_) {
      if (series.first_week() > t) continue;
      double x = series.total_through(t) / static_cast<double>(t);
      s.max_strength_ = std::max(s.max_strength_, x);
      s.out_[series.src].push_back({series.dst, x});
      if (directed_) {
        s.in_[series.dst].push_back({series.src, x});
      } else {
        s.out_[series.dst].push_back({series.src, x});
      }
      s.undirected_[series.src].push_back(series.dst);
      s.undirected_[series.dst].push_back(series.src);
    }
  }
  auto by_index = [](const Neighbor& a, const Neighbor& b) { return a.index < b.index; };
  for (auto& list : s.out_) std::sort(list.begin(), list.end(), by_index);
  for (auto& list : s.in_) std::sort(list.begin(), list.end(), by_index);
  for (auto& list : s.undirected_) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }

  s.traits_.reserve(n);
  for (Index i = 0; i < n; ++i) s.traits_.push_back(characteristics_at(i, t));
  s.ranges_.assign(schema_.size(), {});
  for (std::size_t a = 0; a < schema_.size(); ++a) {
    if (schema_.attributes[a].type == AttributeType::Nominal || n == 0) continue;
    double lo = s.traits_[0][a], hi = lo;
    for (const auto& c : s.traits_) {
      lo = std::min(lo, c[a]);
      hi = std::max(hi, c[a]);
    }
    s.ranges_[a] = {lo, hi};
  }

  s.adoption_week_.resize(n);
  for (Index i = 0; i < n; ++i) {
    Week w = adoption_week_[i];
    s.adoption_week_[i] = (w != 0 && w <= t) ? w : 0;
  }
  return s;
}

Dataset Dataset::truncated(Week t) const {
  if (t < 1 || t > horizon_) throw ValidationError("truncation week out of range");
  Dataset d = *this;
  d.horizon_ = t;
  for (auto& rows : d.profiles_) {
    auto keep_end = std::upper_bound(rows.begin() + 1, rows.end(), t,
                                     [](Week w, const auto& row) { return w < row.first; });
    rows.erase(keep_end, rows.end());
  }
  std::vector<CommunicationSeries> kept;
  for (auto s : d.series_) {
    auto end = std::upper_bound(s.weeks.begin(), s.weeks.end(), t);
    std::size_t k = static_cast<std::size_t>(end - s.weeks.begin());
    if (k == 0) continue;
    s.weeks.resize(k);
    s.cumulative.resize(k);
    kept.push_back(std::move(s));
  }
  d.series_ = std::move(kept);
  for (auto& w : d.adoption_week_)
    if (w > t) w = 0;
  std::erase_if(d.actions_, [t](const ActionEvent& e) { return e.week > t; });
  return d;
}

// ---------------------------------------------------------------- builder

DatasetBuilder::DatasetBuilder(AttributeSchema schema, bool directed) {
  data_.schema_ = std::move(schema);
  data_.directed_ = directed;
  data_.nominal_labels_.resize(data_.schema_.size());
  nominal_codes_.resize(data_.schema_.size());
}

void DatasetBuilder::add_entity(EntityId id) {
  if (data_.index_.count(id)) return;
  Index idx = static_cast<Index>(data_.ids_.size());
  data_.index_.emplace(id, idx);
  data_.ids_.push_back(id);
  data_.profiles_.emplace_back();
}

Index DatasetBuilder::require(EntityId id, const char* what) const {
  auto it = data_.index_.find(id);
  if (it == data_.index_.end())
    throw ValidationError(std::string(what) + " references unknown entity " + std::to_string(id));
  return it->second;
}

void DatasetBuilder::add_profile(EntityId id, Week week, const std::vector<std::string>& values) {
  const auto& attrs = data_.schema_.attributes;
  if (values.size() != attrs.size())
    throw ValidationError("profile row for entity " + std::to_string(id) + " has " +
                          std::to_string(values.size()) + " attributes, schema declares " +
                          std::to_string(attrs.size()));
  if (week < 0) throw ValidationError("negative profile week for entity " + std::to_string(id));
  CharacteristicVector c(attrs.size());
  for (std::size_t a = 0; a < attrs.size(); ++a) {
    const std::string& v = values[a];
    if (v.empty())
      throw ValidationError("missing value for attribute '" + attrs[a].name + "' of entity " +
                            std::to_string(id));
    if (attrs[a].type == AttributeType::Nominal) {
      auto& codes = nominal_codes_[a];
      auto [it, inserted] = codes.emplace(v, static_cast<int>(codes.size()));
      if (inserted) data_.nominal_labels_[a].push_back(v);
      c[a] = it->second;
    } else {
      char* end = nullptr;
      double x = std::strtod(v.c_str(), &end);
      if (end != v.c_str() + v.size() || !std::isfinite(x))
        throw ValidationError("attribute '" + attrs[a].name + "' of entity " + std::to_string(id) +
                              " is not numeric: '" + v + "'");
      if (attrs[a].type == AttributeType::Integer && x != std::floor(x))
        throw ValidationError("attribute '" + attrs[a].name + "' of entity " + std::to_string(id) +
                              " is not an integer: '" + v + "'");
      c[a] = x;
    }
  }
  add_entity(id);
  auto& rows = data_.profiles_[data_.index_.at(id)];
  auto pos = std::lower_bound(rows.begin(), rows.end(), week,
                              [](const auto& row, Week w) { return row.first < w; });
  if (pos != rows.end() && pos->first == week) {
    pos->second = std::move(c);
  } else {
    rows.insert(pos, {week, std::move(c)});
  }
}

void DatasetBuilder::add_communication(EntityId src, EntityId dst, Week week, double intensity) {
  Index s = require(src, "communication");
  Index d = require(dst, "communication");
  if (s == d) throw ValidationError("self-communication for entity " + std::to_string(src));
  if (week < 1) throw ValidationError("communication week must be >= 1");
  if (!(intensity >= 0.0) || !std::isfinite(intensity))
    throw ValidationError("communication intensity must be a non-negative number");
  comms_.push_back({s, d, week, intensity});
}

void DatasetBuilder::add_adoption(EntityId id, ItemId item, Week week) {
  Index e = require(id, "adoption");
  if (week < 1) throw ValidationError("adoption week must be >= 1 (entity " + std::to_string(id) + ")");
  if (!adopted_.insert({id, item}).second)
    throw ValidationError("duplicate adoption of item " + std::to_string(item) + " by entity " + std::to_string(id));
  adoptions_.push_back({e, item, week});
}

Dataset DatasetBuilder::build(std::optional<Week> horizon, std::optional<ItemId> focal_item) && {
  Dataset& d = data_;
  const std::size_t n = d.ids_.size();

  // Dense indices follow entity id order.
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](Index a, Index b) { return d.ids_[a] < d.ids_[b]; });
  std::vector<Index> remap(n);
  for (Index k = 0; k < n; ++k) remap[order[k]] = k;
  {
    std::vector<EntityId> ids(n);
    std::vector<std::vector<std::pair<Week, CharacteristicVector>>> profiles(n);
    for (Index k = 0; k < n; ++k) {
      ids[k] = d.ids_[order[k]];
      profiles[k] = std::move(d.profiles_[order[k]]);
    }
    d.ids_ = std::move(ids);
    d.profiles_ = std::move(profiles);
    d.index_.clear();
    for (Index k = 0; k < n; ++k) d.index_.emplace(d.ids_[k], k);
  }
  for (auto& c : comms_) {
    c.src = remap[c.src];
    c.dst = remap[c.dst];
  }
  for (auto& a : adoptions_) a.entity = remap[a.entity];

  if (d.schema_.size() > 0) {
    for (Index i = 0; i < n; ++i) {
      if (d.profiles_[i].empty())
        throw ValidationError("entity " + std::to_string(d.ids_[i]) + " has no profile row");
      if (d.profiles_[i].front().first > 1)
        throw ValidationError("profile of entity " + std::to_string(d.ids_[i]) +
                              " starts after week 1");
    }
  } else {
    for (auto& rows : d.profiles_)
      if (rows.empty()) rows.push_back({0, {}});
  }

  Week max_week = 0;
  for (const auto& c : comms_) max_week = std::max(max_week, c.week);
  for (const auto& a : adoptions_) max_week = std::max(max_week, a.week);
  d.horizon_ = horizon.value_or(max_week);
  if (d.horizon_ < 1) d.horizon_ = std::max(1, max_week);
  for (const auto& c : comms_)
    if (c.week > d.horizon_)
      throw ValidationError("communication week " + std::to_string(c.week) + " beyond horizon " +
                            std::to_string(d.horizon_));

  // Focal item.
  std::vector<ItemId> items;
  for (const auto& a : adoptions_) items.push_back(a.item);
  std::sort(items.begin(), items.end());
  items.erase(std::unique(items.begin(), items.end()), items.end());
  if (focal_item) {
    d.focal_item_ = *focal_item;
  } else if (items.size() <= 1) {
    d.focal_item_ = items.empty() ? 0 : items.front();
  } else {
    throw ValidationError("adoption log holds " + std::to_string(items.size()) +
                          " items; choose the focal item explicitly");
  }

  d.adoption_week_.assign(n, 0);
  std::map<std::pair<Index, ItemId>, Week> seen;
  for (const auto& a : adoptions_) {
    if (a.week > d.horizon_)
      throw ValidationError("adoption week " + std::to_string(a.week) + " of entity " +
                            std::to_string(d.ids_[a.entity]) + " outside [1, " +
                            std::to_string(d.horizon_) + "]");
    if (!seen.emplace(std::pair{a.entity, a.item}, a.week).second)
      throw ValidationError("duplicate adoption of item " + std::to_string(a.item) + " by entity " +
                            std::to_string(d.ids_[a.entity]));
    if (a.item == d.focal_item_) {
      d.adoption_week_[a.entity] = a.week;
    } else {
      d.actions_.push_back({a.entity, a.item, a.week});
    }
  }
  std::sort(d.actions_.begin(), d.actions_.end(), [](const ActionEvent& a, const ActionEvent& b) {
    return std::tie(a.item, a.week, a.entity) < std::tie(b.item, b.week, b.entity);
  });

  // Aggregate communications per tie into running totals.
  std::map<std::pair<Index, Index>, std::map<Week, double>> per_tie;
  for (const auto& c : comms_) {
    Index a = c.src, b = c.dst;
    if (!d.directed_ && a > b) std::swap(a, b);
    per_tie[{a, b}][c.week] += c.intensity;
  }
  d.series_.clear();
  d.series_.reserve(per_tie.size());
  for (const auto& [key, weekly] : per_tie) {
    CommunicationSeries s{key.first, key.second, {}, {}};
    double total = 0.0;
    for (const auto& [w, x] : weekly) {
      total += x;
      s.weeks.push_back(w);
      s.cumulative.push_back(total);
    }
    d.series_.push_back(std::move(s));
  }
  return std::move(d);
}

// ---------------------------------------------------------------- file ingest

namespace {

Week parse_week(const CsvReader& r, const std::string& field) {
  return static_cast<Week>(std::floor(r.as_double(field, "week")));
}

void expect_columns(const CsvReader& r, const std::vector<std::string>& fields, std::size_t n) {
  if (fields.size() != n)
    r.fail("expected " + std::to_string(n) + " columns, found " + std::to_string(fields.size()));
}

EntityId parse_id(const CsvReader& r, const std::string& field, const char* column) {
  long long v = r.as_int(field, column);
  if (v < 0) r.fail(std::string("negative id in column '") + column + "'");
  return static_cast<EntityId>(v);
}

std::set<ItemId> read_adoptions(DatasetBuilder& builder, const std::string& path) {
  std::set<ItemId> items;
  CsvReader r(path);
  std::vector<std::string> f;
  while (r.next(f)) {
    expect_columns(r, f, 3);
    EntityId id = parse_id(r, f[0], "entity_id");
    ItemId item = parse_id(r, f[1], "item_id");
    Week w = parse_week(r, f[2]);
    items.insert(item);
    try {
      builder.add_adoption(id, item, w);
    } catch (const ValidationError& e) {
      r.fail(e.what());
    }
  }
  return items;
}

}  // namespace

Dataset ingest_events(const std::string& communications_file, const std::string& profiles_file,
                      const std::string& adoption_file, const IngestOptions& options) {
  std::string schema_path = options.schema_path;
  if (schema_path.empty()) {
    std::filesystem::path p(profiles_file);
    schema_path = (p.parent_path() / p.stem()).string() + ".schema.json";
  }
  AttributeSchema schema = AttributeSchema::load_json(schema_path);
  const std::size_t n_attrs = schema.size();
  DatasetBuilder builder(std::move(schema), options.directed);

  {
    CsvReader r(profiles_file);
    std::vector<std::string> f;
    while (r.next(f)) {
      expect_columns(r, f, 2 + n_attrs);
      EntityId id = parse_id(r, f[0], "entity_id");
      Week w = static_cast<Week>(std::floor(r.as_double(f[1], "week")));
      if (w < 0) r.fail("negative week");
      try {
        builder.add_profile(id, w, std::vector<std::string>(f.begin() + 2, f.end()));
      } catch (const ValidationError& e) {
        r.fail(e.what());
      }
    }
  }
  {
    CsvReader r(communications_file);
    std::vector<std::string> f;
    while (r.next(f)) {
      expect_columns(r, f, 4);
      EntityId src = parse_id(r, f[0], "src_id");
      EntityId dst = parse_id(r, f[1], "dst_id");
      Week w = parse_week(r, f[2]);
      double x = r.as_double(f[3], "intensity");
      try {
        builder.add_communication(src, dst, w, x);
      } catch (const ValidationError& e) {
        r.fail(e.what());
      }
    }
  }
  std::set<ItemId> items = read_adoptions(builder, adoption_file);
  std::optional<ItemId> focal = options.item;
  if (!focal && items.size() == 1) focal = *items.begin();
  if (!focal && items.empty()) focal = ItemId{0};
  if (!options.actions_path.empty()) read_adoptions(builder, options.actions_path);
  return std::move(builder).build(options.horizon, focal);
}

}  // namespace adopt
