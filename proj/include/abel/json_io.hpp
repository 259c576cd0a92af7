#pragma once

#include <json.hpp>

#include "abel/equidist.hpp"
#include "abel/orbit.hpp"
#include "abel/zariski.hpp"

namespace abel {

using Json = nlohmann::ordered_json;

// Throws validation_error when obj carries a key outside `allowed`.
void check_keys(const Json& obj, std::initializer_list<const char*> allowed,
                const std::string& where);

Json to_json(const GroupDescriptor& g);
GroupDescriptor group_from_json(const Json& j);

Json to_json(const Element& x);
Element element_from_json(const Json& j);

Json to_json(const SetExprPtr& x);
SetExprPtr setexpr_from_json(const Json& j, const GroupDescriptor& g);

Json to_json(const GroupDescriptor& g, const ClosedSet& c);
ClosedSet closedset_from_json(const Json& j, const GroupDescriptor& g);

Json to_json(const TorusPoint& p);
TorusPoint toruspoint_from_json(const Json& j);

Json to_json(const ArcBox& b);
ArcBox arcbox_from_json(const Json& j);

Json to_json(const Requirement& r);
Requirement requirement_from_json(const Json& j);

Json to_json(const Witness& w);

Json to_json(const FormalReal& f);
FormalReal formalreal_from_json(const Json& j);

Json to_json(const TorsionClass& t);
Json to_json(const PrefixReport& r);
Json to_json(const DensityCertificate& c);
Json to_json(const std::vector<UdRow>& rows);
Json to_json(const GroupDescriptor& g, const HomResult& h);
Json to_json(const FlowReport& f);

// FNV-1a over raw bytes; reports embed this for offline re-verification.
std::string fnv1a_hex(const std::string& bytes);

} // namespace abel
