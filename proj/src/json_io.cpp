#include "abel/json_io.hpp"

#include <cstdint>

namespace abel {

namespace {

std::map<long long, long long> sparse_from_json(const Json& j, const char* where) {
    std::map<long long, long long> out;
    if (!j.is_object()) throw validation_error(std::string(where) + ": expected an object");
    for (const auto& [key, val] : j.items()) {
        std::size_t pos = 0;
        long long k;
        try {
            k = std::stoll(key, &pos);
        } catch (const std::exception&) {
            throw validation_error(std::string(where) + ": bad sparse index '" + key + "'");
        }
        if (pos != key.size())
            throw validation_error(std::string(where) + ": bad sparse index '" + key + "'");
        if (!val.is_number_integer())
            throw validation_error(std::string(where) + ": entries must be integers");
        out[k] = val.get<long long>();
    }
    return out;
}

Json sparse_to_json(const std::map<long long, long long>& m) {
    Json j = Json::object();
    for (const auto& [k, v] : m) j[std::to_string(k)] = v;
    return j;
}

long long int_field(const Json& j, const char* key, const char* where) {
    if (!j.contains(key) || !j[key].is_number_integer())
        throw validation_error(std::string(where) + ": missing integer field '" + key + "'");
    return j[key].get<long long>();
}

Rat rat_field(const Json& v, const char* where) {
    if (v.is_number_integer()) return make_rat(v.get<long long>());
    if (v.is_string()) return parse_rational(v.get<std::string>());
    throw validation_error(std::string(where) + ": rationals travel as \"p/q\" strings");
}

} // namespace

void check_keys(const Json& obj, std::initializer_list<const char*> allowed,
                const std::string& where) {
    if (!obj.is_object()) throw validation_error(where + ": expected an object");
    for (const auto& [key, val] : obj.items()) {
        (void)val;
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) {
                ok = true;
                break;
            }
        if (!ok) throw validation_error(where + ": unknown key '" + key + "'");
    }
}

Json to_json(const GroupDescriptor& g) {
    return Json{{"free_rank", g.free_rank()},
                {"finite_orders", g.finite_orders()},
                {"tail_pattern", g.tail_pattern()}};
}

GroupDescriptor group_from_json(const Json& j) {
    check_keys(j, {"free_rank", "finite_orders", "tail_pattern"}, "group");
    std::vector<long long> fo, tp;
    if (j.contains("finite_orders")) fo = j["finite_orders"].get<std::vector<long long>>();
    if (j.contains("tail_pattern")) tp = j["tail_pattern"].get<std::vector<long long>>();
    long long fr = j.contains("free_rank") ? int_field(j, "free_rank", "group") : 0;
    return GroupDescriptor(fr, std::move(fo), std::move(tp));
}

Json to_json(const Element& x) {
    return Json{{"free", sparse_to_json(x.free)},
                {"finite", sparse_to_json(x.finite)},
                {"tail", sparse_to_json(x.tail)}};
}

Element element_from_json(const Json& j) {
    check_keys(j, {"free", "finite", "tail"}, "element");
    Element e;
    if (j.contains("free")) e.free = sparse_from_json(j["free"], "element.free");
    if (j.contains("finite")) e.finite = sparse_from_json(j["finite"], "element.finite");
    if (j.contains("tail")) e.tail = sparse_from_json(j["tail"], "element.tail");
    return e;
}

Json to_json(const SetExprPtr& x) {
    return std::visit(
        [&](const auto& node) -> Json {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, FiniteLeaf>) {
                Json els = Json::array();
                for (const Element& e : node.elements) els.push_back(to_json(e));
                return Json{{"kind", "finite"}, {"elements", els}};
            } else if constexpr (std::is_same_v<T, AffineLeaf>) {
                return Json{{"kind", "affine"}, {"a", to_json(node.a)}, {"b", to_json(node.b)}};
            } else if constexpr (std::is_same_v<T, BlockLeaf>) {
                return Json{{"kind", "block"},
                            {"c", to_json(node.c)},
                            {"template", to_json(node.templ)},
                            {"start", node.start},
                            {"step", node.step}};
            } else if constexpr (std::is_same_v<T, TranslateNode>) {
                return Json{{"kind", "translate"},
                            {"g", to_json(node.g)},
                            {"inner", to_json(node.inner)}};
            } else {
                Json parts = Json::array();
                for (const SetExprPtr& p : node.parts) parts.push_back(to_json(p));
                return Json{{"kind", "union"}, {"parts", parts}};
            }
        },
        x->node);
}

SetExprPtr setexpr_from_json(const Json& j, const GroupDescriptor& g) {
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
        throw validation_error("set expression: missing \"kind\"");
    std::string kind = j["kind"].get<std::string>();
    if (kind == "finite") {
        check_keys(j, {"kind", "elements"}, "finite set");
        std::vector<Element> es;
        for (const Json& e : j.value("elements", Json::array())) es.push_back(element_from_json(e));
        return make_finite(std::move(es));
    }
    if (kind == "affine") {
        check_keys(j, {"kind", "a", "b"}, "affine set");
        return make_affine(element_from_json(j.at("a")), element_from_json(j.at("b")));
    }
    if (kind == "block") {
        check_keys(j, {"kind", "c", "template", "start", "step"}, "block set");
        return make_block(g, element_from_json(j.at("c")), element_from_json(j.at("template")),
                          int_field(j, "start", "block set"), int_field(j, "step", "block set"));
    }
    if (kind == "translate") {
        check_keys(j, {"kind", "g", "inner"}, "translate");
        return make_translate(element_from_json(j.at("g")), setexpr_from_json(j.at("inner"), g));
    }
    if (kind == "union") {
        check_keys(j, {"kind", "parts"}, "union");
        std::vector<SetExprPtr> parts;
        for (const Json& p : j.value("parts", Json::array()))
            parts.push_back(setexpr_from_json(p, g));
        return make_union(std::move(parts));
    }
    throw validation_error("set expression: unknown kind '" + kind + "'");
}

Json to_json(const GroupDescriptor& g, const ClosedSet& c) {
    (void)g;
    Json fin = Json::array();
    for (const Element& e : c.finite_part) fin.push_back(to_json(e));
    Json cos = Json::array();
    for (const Coset& k : c.cosets) cos.push_back(Json{{"rep", to_json(k.rep)}, {"mod", k.modulus}});
    return Json{{"finite", fin}, {"cosets", cos}};
}

ClosedSet closedset_from_json(const Json& j, const GroupDescriptor& g) {
    check_keys(j, {"finite", "cosets"}, "closed set");
    ClosedSet raw;
    for (const Json& e : j.value("finite", Json::array()))
        raw.finite_part.push_back(element_from_json(e));
    for (const Json& c : j.value("cosets", Json::array())) {
        check_keys(c, {"rep", "mod"}, "coset");
        raw.cosets.push_back(Coset{element_from_json(c.at("rep")), int_field(c, "mod", "coset")});
    }
    return normalize_closed(g, std::move(raw));
}

Json to_json(const TorusPoint& p) {
    Json arr = Json::array();
    for (const Rat& c : p.coords) arr.push_back(rational_str(c));
    return arr;
}

TorusPoint toruspoint_from_json(const Json& j) {
    if (!j.is_array()) throw validation_error("torus point: expected an array");
    std::vector<Rat> cs;
    for (const Json& v : j) cs.push_back(rat_field(v, "torus point"));
    return TorusPoint(std::move(cs));
}

Json to_json(const ArcBox& b) {
    Json c = Json::array(), r = Json::array();
    for (const Rat& v : b.center) c.push_back(rational_str(v));
    for (const Rat& v : b.radius) r.push_back(rational_str(v));
    return Json{{"center", c}, {"radius", r}};
}

ArcBox arcbox_from_json(const Json& j) {
    check_keys(j, {"center", "radius"}, "arc box");
    ArcBox b;
    for (const Json& v : j.value("center", Json::array())) b.center.push_back(rat_field(v, "box"));
    for (const Json& v : j.value("radius", Json::array())) b.radius.push_back(rat_field(v, "box"));
    b.validate();
    return b;
}

Json to_json(const Requirement& r) {
    return Json{{"id", r.id}, {"level", r.level}, {"box", to_json(r.box)}};
}

Requirement requirement_from_json(const Json& j) {
    check_keys(j, {"id", "level", "box"}, "requirement");
    Requirement r;
    r.id = static_cast<std::size_t>(int_field(j, "id", "requirement"));
    r.level = int_field(j, "level", "requirement");
    r.box = arcbox_from_json(j.at("box"));
    return r;
}

Json to_json(const Witness& w) {
    Json shifts = Json::array();
    for (const Int& n : w.shifts) shifts.push_back(n.get_str());
    Json margins = Json::array();
    for (const Rat& m : w.margins) margins.push_back(rational_str(m));
    return Json{{"requirement", w.requirement_id},
                {"s", w.s},
                {"shifts", shifts},
                {"achieved", to_json(w.achieved)},
                {"margins", margins}};
}

Json to_json(const FormalReal& f) {
    Json coeffs = Json::object();
    for (const auto& [i, v] : f.coeffs) coeffs[std::to_string(i)] = rational_str(v);
    return Json{{"c0", rational_str(f.c0)}, {"coeffs", coeffs}};
}

FormalReal formalreal_from_json(const Json& j) {
    if (j.is_string() || j.is_number_integer()) {
        FormalReal f;
        f.c0 = rat_field(j, "formal real");
        return f;
    }
    check_keys(j, {"c0", "coeffs"}, "formal real");
    FormalReal f;
    if (j.contains("c0")) f.c0 = rat_field(j["c0"], "formal real");
    if (j.contains("coeffs")) {
        for (const auto& [key, val] : j["coeffs"].items()) {
            int idx = std::stoi(key);
            f.coeffs[idx] = rat_field(val, "formal real");
        }
    }
    f.prune();
    return f;
}

Json to_json(const TorsionClass& t) {
    switch (t.kind) {
        case TorsionClass::Kind::finite_set: return Json{{"class", "finite"}};
        case TorsionClass::Kind::almost_torsion:
            return Json{{"class", "almost-torsion"}, {"n", t.level}};
        case TorsionClass::Kind::not_almost_torsion:
            return Json{{"class", "not-almost-torsion"},
                        {"witness", Json{{"d", t.witness->d}, {"g", to_json(t.witness->g)}}}};
    }
    return {};
}

Json to_json(const PrefixReport& r) {
    Json fibers = Json::array();
    for (const FiberStat& f : r.max_fiber_per_divisor)
        fibers.push_back(Json{{"d", f.d}, {"value", to_json(f.value)}, {"count", f.count}});
    Json flagged = Json::array();
    for (const FiberStat& f : r.flagged)
        flagged.push_back(Json{{"d", f.d}, {"value", to_json(f.value)}, {"count", f.count}});
    return Json{{"prefix_len", r.prefix_len}, {"candidate_level", r.candidate_level},
                {"candidate_stable", r.candidate_stable}, {"threshold", r.threshold},
                {"max_fiber_per_divisor", fibers}, {"flagged", flagged},
                {"consistent", r.consistent}, {"caveat", r.caveat}};
}

Json to_json(const DensityCertificate& c) {
    Json j{{"dense", c.dense}, {"mode", c.mode}};
    if (c.killing_scale) j["killing_scale"] = *c.killing_scale;
    if (c.witness_affine) j["witness_affine"] = true;
    if (c.failing_translate) j["failing_translate"] = to_json(*c.failing_translate);
    if (c.translates_checked) j["translates_checked"] = c.translates_checked;
    return j;
}

Json to_json(const std::vector<UdRow>& rows) {
    Json out = Json::array();
    for (const UdRow& r : rows)
        out.push_back(Json{{"k", r.k.k}, {"magnitude", r.magnitude}, {"bound", r.bound},
                           {"pass", r.pass}});
    return out;
}

Json to_json(const GroupDescriptor& g, const HomResult& h) {
    (void)g;
    Json images = Json::object();
    for (const auto& [id, p] : h.assignment.images) images[to_string(id)] = to_json(p);
    Json wits = Json::array();
    for (const HomWitness& w : h.witnesses)
        wits.push_back(Json{{"family", w.family}, {"requirement", w.requirement_id},
                            {"element", to_json(w.element)}, {"image", to_json(w.image)}});
    return Json{{"dim", h.assignment.dim}, {"images", images}, {"witnesses", wits},
                {"backtracks", h.backtracks}};
}

Json to_json(const FlowReport& f) {
    Json boxes = Json::array();
    for (const BoxHit& b : f.boxes) {
        Json jb{{"hits", b.hits}};
        if (b.first_hit) jb["first_hit"] = *b.first_hit;
        boxes.push_back(std::move(jb));
    }
    return Json{{"points", f.points}, {"boxes", boxes},
                {"mean_star_discrepancy", f.mean_star_discrepancy}, {"scope", f.scope_note}};
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace abel
