#include <gtest/gtest.h>

#include <cstdlib>

#include "test_util.hpp"

using namespace ectx;

TEST(KvConfig, ParsesKeysValuesAndComments) {
  test::TempDir dir("ectx-cfg");
  test::write_file(dir.file("c.cfg"),
                   "# a comment line\n"
                   "backend = scripted\n"
                   "max_steps=12   # trailing comment\n"
                   "\n"
                   "question = spaced  value \n");
  const auto cfg = KvConfig::load(dir.file("c.cfg"));
  EXPECT_EQ(cfg.get("backend"), "scripted");
  EXPECT_EQ(cfg.get("max_steps"), "12");
  EXPECT_EQ(cfg.get("question"), "spaced  value");
  EXPECT_FALSE(cfg.has("missing"));
  EXPECT_EQ(cfg.get("missing", "dflt"), "dflt");
}

TEST(KvConfig, RejectsMalformedLines) {
  test::TempDir dir("ectx-cfg2");
  test::write_file(dir.file("c.cfg"), "just words without equals\n");
  try {
    KvConfig::load(dir.file("c.cfg"));
    FAIL() << "expected parse error";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("line 1"), std::string::npos);
  }
  EXPECT_THROW(KvConfig::load(dir.file("nope.cfg")), std::runtime_error);
}

TEST(Resolution, FlagOverridesEnvOverridesFile) {
  test::TempDir dir("ectx-cfg3");
  test::write_file(dir.file("c.cfg"), "endpoint = http://file.example\n");
  const auto file = KvConfig::load(dir.file("c.cfg"));

  ::setenv("ECTX_TEST_ENDPOINT", "http://env.example", 1);
  EXPECT_EQ(resolve_setting("http://flag.example", "ECTX_TEST_ENDPOINT", file,
                            "endpoint", "http://default.example"),
            "http://flag.example");
  EXPECT_EQ(resolve_setting("", "ECTX_TEST_ENDPOINT", file, "endpoint",
                            "http://default.example"),
            "http://env.example");
  ::unsetenv("ECTX_TEST_ENDPOINT");
  EXPECT_EQ(resolve_setting("", "ECTX_TEST_ENDPOINT", file, "endpoint",
                            "http://default.example"),
            "http://file.example");
  EXPECT_EQ(resolve_setting("", "ECTX_TEST_ENDPOINT", KvConfig{}, "endpoint",
                            "http://default.example"),
            "http://default.example");
}

TEST(Estimators, RegistryAndDefault) {
  EXPECT_EQ(bytes_per_token_estimate(""), 0u);
  EXPECT_EQ(bytes_per_token_estimate("abcd"), 1u);
  EXPECT_EQ(bytes_per_token_estimate("abcde"), 2u);
  EXPECT_EQ(make_estimator("bytes/4")("12345678"), 2u);
  EXPECT_EQ(make_estimator("bytes")("12345678"), 8u);
  EXPECT_THROW(make_estimator("gpt-words"), std::invalid_argument);
}
