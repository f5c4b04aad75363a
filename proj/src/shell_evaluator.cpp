#include "gctune/shell_evaluator.hpp"

#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cmath>

#include "gctune/error.hpp"

namespace gctune {

CommandResult run_command(const std::string& command, double timeout_seconds) {
  int fds[2];
  if (pipe(fds) != 0) throw EvaluatorError("pipe() failed");
  const pid_t pid = fork();
  if (pid < 0) {
    close(fds[0]);
    close(fds[1]);
    throw EvaluatorError("fork() failed");
  }
  if (pid == 0) {
    setpgid(0, 0);
    dup2(fds[1], STDOUT_FILENO);
    dup2(fds[1], STDERR_FILENO);
    close(fds[0]);
    close(fds[1]);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(fds[1]);

  CommandResult result;
  using clock = std::chrono::steady_clock;
  const auto deadline = clock::now() + std::chrono::duration<double>(timeout_seconds);
  char buf[4096];
  for (;;) {
    int wait_ms = -1;
    if (timeout_seconds > 0.0) {
      auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - clock::now()).count();
      if (left <= 0) {
        result.timed_out = true;
        kill(-pid, SIGKILL);
        break;
      }
      wait_ms = static_cast<int>(std::min<long long>(left, 1000));
    }
    pollfd p{fds[0], POLLIN, 0};
    int rc = poll(&p, 1, wait_ms);
    if (rc < 0 && errno == EINTR) continue;
    if (rc == 0) continue;
    ssize_t n = read(fds[0], buf, sizeof(buf));
    if (n > 0) {
      result.output.append(buf, static_cast<std::size_t>(n));
    } else if (n == 0 || errno != EINTR) {
      break;
    }
  }
  close(fds[0]);
  int status = 0;
  while (waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  if (!result.timed_out) result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
  return result;
}

std::set<std::string> template_placeholders(const std::string& tmpl) {
  std::set<std::string> names;
  for (std::size_t pos = 0; (pos = tmpl.find('{', pos)) != std::string::npos;) {
    auto end = tmpl.find('}', pos);
    if (end == std::string::npos) break;
    names.insert(tmpl.substr(pos + 1, end - pos - 1));
    pos = end + 1;
  }
  return names;
}

std::string render_template(const std::string& tmpl, const std::map<std::string, std::string>& values) {
  std::string out;
  std::size_t pos = 0;
  for (;;) {
    auto open = tmpl.find('{', pos);
    auto close = open == std::string::npos ? std::string::npos : tmpl.find('}', open);
    if (close == std::string::npos) {
      out += tmpl.substr(pos);
      return out;
    }
    out += tmpl.substr(pos, open - pos);
    const auto name = tmpl.substr(open + 1, close - open - 1);
    auto it = values.find(name);
    if (it == values.end()) throw UsageError("command template uses unknown placeholder {" + name + "}");
    out += it->second;
    pos = close + 1;
  }
}

ShellEvaluator::ShellEvaluator(const ParameterSpace& space, ShellEvaluatorOptions opts)
    : space_(space), opts_(std::move(opts)) {
  if (opts_.repeats < 1) throw UsageError("repeats must be at least 1");
  auto names = template_placeholders(opts_.command_template);
  for (const auto& n : names)
    if (!space.index_of(n) && n != space.task_feature().name())
      throw UsageError("command template placeholder {" + n + "} is not in the space");
  for (const auto& p : space.params())
    if (!names.count(p.name())) throw UsageError("command template lacks placeholder {" + p.name() + "}");
  try {
    pattern_ = std::regex(opts_.pattern);
  } catch (const std::regex_error& e) {
    throw UsageError("bad objective pattern: " + std::string(e.what()));
  }
  if (pattern_.mark_count() != 1) throw UsageError("objective pattern needs exactly one capture group");
}

std::string ShellEvaluator::command_for(const Configuration& config, double task_value) const {
  auto values = space_.serialize(config);
  values[space_.task_feature().name()] = to_string(space_.task_feature().from_numeric(task_value));
  return render_template(opts_.command_template, values);
}

EvalOutcome ShellEvaluator::evaluate(const Configuration& config, double task_value) {
  const std::string cmd = command_for(config, task_value);
  std::vector<double> runs;
  for (int r = 0; r < opts_.repeats; ++r) {
    CommandResult res = run_command(cmd, opts_.timeout_seconds);
    if (res.timed_out) return EvalOutcome::failed("timed out: " + cmd);
    if (res.exit_code != 0) return EvalOutcome::failed("exit status " + std::to_string(res.exit_code) + ": " + cmd);
    std::smatch m;
    if (!std::regex_search(res.output, m, pattern_)) return EvalOutcome::failed("objective not found in output");
    try {
      double v = std::stod(m[1].str());
      if (!std::isfinite(v)) return EvalOutcome::failed("non-finite objective");
      runs.push_back(v);
    } catch (const std::exception&) {
      return EvalOutcome::failed("unparsable objective '" + m[1].str() + "'");
    }
  }
  const std::size_t skip = runs.size() > 1 ? 1 : 0;
  double sum = 0.0;
  for (std::size_t i = skip; i < runs.size(); ++i) sum += runs[i];
  return EvalOutcome::ok(sum / static_cast<double>(runs.size() - skip));
}

}  // namespace gctune
