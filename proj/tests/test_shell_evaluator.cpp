#include <gtest/gtest.h>

#include <chrono>
#include <filesystem>
#include <fstream>

#include "gctune/error.hpp"
#include "gctune/shell_evaluator.hpp"

using namespace gctune;
namespace fs = std::filesystem;

namespace {

ParameterSpace space() {
  return ParameterSpace({ParameterDef("bs", IntegerDomain{1, 64}), ParameterDef("algo", CategoricalDomain{{"a", "b"}})},
                        ParameterDef("n", IntegerDomain{1, 4096}));
}

Configuration cfg(std::int64_t bs, const char* algo) { return Configuration({Value{bs}, Value{std::string(algo)}}); }

// Writes a script that prints the next value of `values` on each call.
fs::path sequence_script(const std::string& name, const std::vector<std::string>& values) {
  const fs::path dir = fs::path(GCTUNE_TEST_TMP) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ofstream s(dir / "bench.sh");
  s << "n=$(cat '" << (dir / "count").string() << "' 2>/dev/null || echo 0)\n"
    << "n=$((n+1))\necho $n > '" << (dir / "count").string() << "'\n"
    << "case $n in\n";
  for (std::size_t i = 0; i < values.size(); ++i) s << "  " << i + 1 << ") echo 'elapsed: " << values[i] << " s';;\n";
  s << "esac\n";
  return dir / "bench.sh";
}

}  // namespace

TEST(Template, PlaceholdersAndRendering) {
  EXPECT_EQ(template_placeholders("./run -b {bs} -a {algo} {n}"), (std::set<std::string>{"bs", "algo", "n"}));
  EXPECT_EQ(render_template("x{a}y{b}", {{"a", "1"}, {"b", "two"}}), "x1ytwo");
  EXPECT_THROW(render_template("{zz}", {}), UsageError);
}

TEST(ShellEvaluator, DiscardsFirstRunAndAverages) {
  auto script = sequence_script("avg", {"5", "2", "4"});
  ShellEvaluator eval(space(), {"sh '" + script.string() + "' {bs} {algo}", R"(elapsed: ([0-9.]+))", 10.0, 3});
  auto out = eval.evaluate(cfg(8, "a"), 100);
  ASSERT_TRUE(out.objective) << out.error;
  EXPECT_DOUBLE_EQ(*out.objective, 3.0);
}

TEST(ShellEvaluator, SingleRepeatKeepsTheRun) {
  auto script = sequence_script("single", {"1.5"});
  ShellEvaluator eval(space(), {"sh '" + script.string() + "' {bs} {algo}", R"(elapsed: ([0-9.]+))", 10.0, 1});
  EXPECT_DOUBLE_EQ(*eval.evaluate(cfg(8, "a"), 100).objective, 1.5);
}

TEST(ShellEvaluator, RendersConfigurationAndTask) {
  ShellEvaluator eval(space(), {"echo {bs}-{algo}-{n}", R"(([0-9]+)-)", 10.0, 1});
  EXPECT_EQ(eval.command_for(cfg(16, "b"), 512), "echo 16-b-512");
  EXPECT_DOUBLE_EQ(*eval.evaluate(cfg(16, "b"), 512).objective, 16.0);
}

TEST(ShellEvaluator, FailureModes) {
  ShellEvaluator nonzero(space(), {"echo 1.0; exit 3 # {bs} {algo}", "([0-9.]+)", 10.0, 1});
  auto a = nonzero.evaluate(cfg(1, "a"), 1);
  EXPECT_FALSE(a.objective);
  EXPECT_NE(a.error.find("exit status 3"), std::string::npos);

  ShellEvaluator nomatch(space(), {"echo nothing # {bs} {algo}", "time=([0-9.]+)", 10.0, 1});
  EXPECT_FALSE(nomatch.evaluate(cfg(1, "a"), 1).objective);

  const auto t0 = std::chrono::steady_clock::now();
  ShellEvaluator slow(space(), {"sleep 5; echo 1 # {bs} {algo}", "([0-9.]+)", 0.3, 1});
  auto s = slow.evaluate(cfg(1, "a"), 1);
  EXPECT_FALSE(s.objective);
  EXPECT_NE(s.error.find("timed out"), std::string::npos);
  EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), 3.0);
}

TEST(ShellEvaluator, TemplateValidation) {
  EXPECT_THROW(ShellEvaluator(space(), {"run {bs}", "([0-9.]+)", 1, 1}), UsageError);
  EXPECT_THROW(ShellEvaluator(space(), {"run {bs} {algo} {other}", "([0-9.]+)", 1, 1}), UsageError);
  EXPECT_THROW(ShellEvaluator(space(), {"run {bs} {algo}", "[0-9.]+", 1, 1}), UsageError);
  EXPECT_THROW(ShellEvaluator(space(), {"run {bs} {algo}", "(a)(b)", 1, 1}), UsageError);
  EXPECT_THROW(ShellEvaluator(space(), {"run {bs} {algo}", "([0-9.]+)", 1, 0}), UsageError);
  EXPECT_NO_THROW(ShellEvaluator(space(), {"run {bs} {algo}", "([0-9.]+)", 1, 1}));
}

TEST(RunCommand, CapturesOutputAndStatus) {
  auto r = run_command("echo out; echo err 1>&2; exit 4", 5.0);
  EXPECT_EQ(r.exit_code, 4);
  EXPECT_FALSE(r.timed_out);
  EXPECT_NE(r.output.find("out"), std::string::npos);
  EXPECT_NE(r.output.find("err"), std::string::npos);
}
