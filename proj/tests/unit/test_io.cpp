#include <functional>
#include <string>

#include "doctest.h"
#include "fixtures.hpp"
#include "wdro/error.hpp"
#include "wdro/harness.hpp"
#include "wdro/io.hpp"
#include "wdro/report.hpp"

using namespace wdro;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("model text round-trips bit for bit") {
  for (ActivationKind act : {ActivationKind::ReLU, ActivationKind::GELU, ActivationKind::SiLU}) {
    ModelSpec spec;
    spec.hidden = {5, 3};
    spec.activation = act;
    const Mlp net = gen_model(spec, 9);
    const std::string text = io::write_model(net);
    const Mlp back = io::read_model_string(text);
    CHECK(io::write_model(back) == text);
    CHECK(back.activation() == act);
    for (std::size_t l = 0; l < net.layers().size(); ++l) {
      CHECK(back.layers()[l].weight == net.layers()[l].weight);
      CHECK(back.layers()[l].bias == net.layers()[l].bias);
    }
  }
  const Mlp lin = fixtures::linear_net(Mat::from_rows({{0.1, 1e-300}, {-2.5e10, 3.0}}));
  CHECK(io::write_model(io::read_model_string(io::write_model(lin))) == io::write_model(lin));
}

TEST_CASE("malformed models report the line") {
  const std::string good = io::write_model(fixtures::abs_net());
  CHECK(code_of([] { io::read_model_string("not a model\n"); }) == ErrorCode::Parse);
  const std::string header_only = good.substr(0, good.find('\n', good.find("layer")) + 1);
  CHECK(code_of([&] { io::read_model_string(header_only); }) == ErrorCode::Parse);
  std::string short_row = good;
  const auto row_start = short_row.find('\n', short_row.find("layer")) + 1;
  short_row.insert(row_start, "0.5 ");
  CHECK(code_of([&] { io::read_model_string(short_row); }) == ErrorCode::ShapeMismatch);
  try {
    io::read_model_string("wdro-mlp 1\ninput x\n");
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("datasets round-trip and are checked against the model") {
  const auto data = gen_data({.samples = 7, .classes = 3}, 2);
  const std::string csv = io::write_dataset(data);
  const auto back = io::read_dataset_string(csv);
  REQUIRE(back.size() == data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    CHECK(back[i].x == data[i].x);
    CHECK(back[i].y == data[i].y);
  }
  CHECK(io::write_dataset(back) == csv);

  ModelSpec spec;
  spec.output_dim = 2;
  const Mlp net = gen_model(spec, 1);
  CHECK(code_of([&] { io::check_dataset(net, data); }) == ErrorCode::InvalidArgument);
  const auto wide = gen_data({.samples = 3, .dim = 3}, 2);
  CHECK(code_of([&] { io::check_dataset(net, wide); }) == ErrorCode::DimensionMismatch);
  CHECK(code_of([] { io::read_dataset_string("x0,label\n1.0,abc\n"); }) == ErrorCode::Parse);
  CHECK(code_of([] { io::load_dataset("/nonexistent/file.csv"); }) == ErrorCode::Io);
}

TEST_CASE("real formatting is shortest round-trip") {
  CHECK(io::format_real(0.1) == "0.1");
  CHECK(io::format_real(1.0) == "1");
  CHECK(std::stod(io::format_real(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("adversarial JSON round-trips") {
  const auto data = gen_data({.samples = 4}, 3);
  ModelSpec spec;
  const Mlp net = gen_model(spec, 3);
  const AttackConfig cfg{.epsilon = 0.1, .kappa = 2.0, .r = NormKind::L2, .alpha = 0.05};
  const auto d = wda(net, data, cfg);
  const std::string json = report::adv_json(d);
  const auto back = report::adv_from_json(json, data);
  CHECK(report::adv_json(back) == json);
  CHECK(code_of([&] { report::adv_from_json("{", data); }) == ErrorCode::Parse);
  CHECK(code_of([&] { report::adv_from_json(R"({"schema":"other"})", data); }) == ErrorCode::Parse);
}
