#include <doctest.h>

#include <regex>
#include <sstream>

#include "support/fixtures.hpp"
#include "tdost/error.hpp"
#include "tdost/home_metadata.hpp"

using namespace tdost;

namespace {

HomeLayout layout_from(const std::string& json) {
    std::istringstream in(json);
    return load_layout(in);
}

std::string one_sensor(const std::string& type, const std::string& basic, const std::string& granular) {
    return R"({"home_id": "h", "residents": 1, "sensors": [{"id": "M001", "type": ")" + type +
           R"(", "location_basic": ")" + basic + R"(", "location_granular": ")" + granular + R"("}]})";
}

}  // namespace

TEST_CASE("shipped layouts load and pass the phrase checks") {
    const auto aruba = support::shipped_layout("aruba");
    CHECK(aruba.sensors.size() == 39);
    CHECK(aruba.residents == 1);
    CHECK(aruba.lookup("M022").location_basic == "the aisle between second bathroom and second bedroom");
    CHECK(aruba.lookup("D004").sensor_type == SensorType::Door);
    CHECK(aruba.find("M040") == nullptr);

    const auto milan = support::shipped_layout("milan");
    CHECK(milan.lookup("M021").location_granular == "bedroom on bed");
    CHECK(milan.lookup("T001").location_granular == "kitchen near stove");

    const auto cairo = support::shipped_layout("cairo");
    CHECK(cairo.residents == 2);
    CHECK(cairo.lookup("M013").location_granular == "near couch in living room");

    const auto kyoto = support::shipped_layout("kyoto7");
    CHECK(kyoto.experimental);

    const std::regex id_like("^[A-Z]+[0-9]+$");
    for (const auto* layout : {&aruba, &milan, &cairo, &kyoto}) {
        for (const auto& [id, meta] : layout->sensors) {
            CHECK(std::regex_match(id, id_like));
            CHECK_FALSE(location_phrase_problem(meta.location_basic).has_value());
            CHECK_FALSE(location_phrase_problem(meta.location_granular).has_value());
            CHECK(meta.location_granular.find(meta.location_basic) != std::string::npos);
        }
    }
}

TEST_CASE("lookup of an unknown sensor names the id") {
    const auto aruba = support::shipped_layout("aruba");
    try {
        aruba.lookup("M099");
        FAIL("expected UnresolvedSensorError");
    } catch (const UnresolvedSensorError& e) {
        CHECK(e.sensor_id() == "M099");
        CHECK(e.kind() == ErrorKind::Data);
    }
}

TEST_CASE("sensor type names") {
    CHECK(sensor_type_name(SensorType::LightSwitch) == "light switch");
    CHECK(sensor_type_token(SensorType::LightSwitch) == "light_switch");
    CHECK(parse_sensor_type("activate_device") == SensorType::ActivateDevice);
    CHECK(parse_sensor_type("temperature") == SensorType::Temperature);
    CHECK_THROWS_AS(parse_sensor_type("pressure"), LayoutError);
}

TEST_CASE("location phrase rules") {
    CHECK_FALSE(location_phrase_problem("kitchen near stove").has_value());
    CHECK_FALSE(location_phrase_problem("workspace/TV room").has_value());
    CHECK_FALSE(location_phrase_problem("the aisle between garage door and second bathroom").has_value());
    CHECK(location_phrase_problem("").has_value());
    CHECK(location_phrase_problem("Kitchen").has_value());
    CHECK(location_phrase_problem(" kitchen").has_value());
    CHECK(location_phrase_problem("living  room").has_value());
    CHECK(location_phrase_problem("a kitchen").has_value());
    CHECK(location_phrase_problem("an office").has_value());
}

TEST_CASE("layout validation errors") {
    CHECK_THROWS_AS(layout_from("{"), LayoutError);
    CHECK_THROWS_AS(layout_from(R"({"home_id": "h", "sensors": {}})"), LayoutError);
    CHECK_THROWS_AS(layout_from(one_sensor("pressure", "kitchen", "kitchen")), LayoutError);
    CHECK_THROWS_AS(layout_from(one_sensor("motion", "Kitchen", "Kitchen")), LayoutError);
    CHECK_THROWS_AS(layout_from(one_sensor("motion", "kitchen", "bathroom near sink")), LayoutError);
    CHECK_NOTHROW(layout_from(one_sensor("motion", "kitchen", "kitchen near sink")));
    const std::string dup = R"({"home_id": "h", "residents": 1, "sensors": [
        {"id": "M001", "type": "motion", "location_basic": "kitchen", "location_granular": "kitchen"},
        {"id": "M001", "type": "door", "location_basic": "kitchen", "location_granular": "kitchen"}]})";
    try {
        layout_from(dup);
        FAIL("expected duplicate id error");
    } catch (const LayoutError& e) {
        CHECK(std::string(e.what()).find("duplicate sensor id") != std::string::npos);
    }
}

TEST_CASE("serialize_layout round-trips") {
    for (const char* home : {"aruba", "milan", "cairo", "kyoto7"}) {
        const auto layout = support::shipped_layout(home);
        CHECK(layout_from(serialize_layout(layout)) == layout);
    }
}
