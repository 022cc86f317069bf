#pragma once

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include "uqcal/model.hpp"

namespace uqcal {

/// Adapts a child process speaking the line protocol into SimulationModel.
///
/// Requests on the child's stdin, one evaluation per line:
///   SIM <dim_a> <dim_e> a... e...
///   REQ <dim_a> <dim_e> <dim_theta> a... e... theta...
/// Responses on its stdout:
///   OK <T+1> <dt> y0 ... yT          (for SIM)
///   OK <G> g1 ... gG                 (for REQ)
///   ERR <message>                    (evaluation failure)
/// Numbers are space-separated decimal at full round-trip precision.
///
/// Access to one child is serialized; fork_worker() spawns a fresh child so
/// parallel pipelines get one process per worker.
class ExternalModel final : public SimulationModel {
  public:
    ExternalModel(std::vector<std::string> argv, std::size_t dim_a, std::size_t dim_e,
                  std::size_t dim_theta, double timeout_s = 60.0)
        : argv_(std::move(argv)), timeout_s_(timeout_s) {
        if (argv_.empty()) throw invalid_input("external model: empty command");
        info_.dim_a = dim_a;
        info_.dim_e = dim_e;
        info_.dim_theta = dim_theta;
        spawn();
    }

    ~ExternalModel() override { shutdown(); }

    ExternalModel(const ExternalModel&) = delete;
    ExternalModel& operator=(const ExternalModel&) = delete;

    static std::vector<std::string> split_command(const std::string& cmd) {
        std::vector<std::string> out;
        std::istringstream in(cmd);
        std::string tok;
        while (in >> tok) out.push_back(tok);
        return out;
    }

    ModelInfo info() const override {
        std::lock_guard<std::mutex> lock(mu_);
        return info_;
    }

    TimeSeries simulate(std::span<const double> a, std::span<const double> e) const override {
        if (a.size() != info_.dim_a || e.size() != info_.dim_e)
            throw invalid_input("external model: a/e dimension mismatch");
        std::ostringstream req;
        req << "SIM " << a.size() << ' ' << e.size();
        append_numbers(req, a);
        append_numbers(req, e);

        std::lock_guard<std::mutex> lock(mu_);
        const std::vector<double> fields = round_trip(req.str());
        if (fields.size() < 2) throw model_error("external model: short SIM response");
        const auto count = std::size_t(fields[0]);
        const double dt = fields[1];
        if (count < 2 || !(dt > 0.0) || fields.size() != count + 2)
            throw model_error("external model: malformed SIM response");
        TimeSeries ts;
        ts.dt = dt;
        ts.values.assign(fields.begin() + 2, fields.end());
        ts.validate();
        info_.n_samples = count;
        info_.dt = dt;
        return ts;
    }

    std::vector<double> requirements(std::span<const double> a, std::span<const double> e,
                                     const DesignPoint& theta) const override {
        std::ostringstream req;
        req << "REQ " << a.size() << ' ' << e.size() << ' ' << theta.theta.size();
        append_numbers(req, a);
        append_numbers(req, e);
        append_numbers(req, theta.theta);

        std::lock_guard<std::mutex> lock(mu_);
        const std::vector<double> fields = round_trip(req.str());
        if (fields.empty()) throw model_error("external model: short REQ response");
        const auto g_count = std::size_t(fields[0]);
        if (g_count < 1 || fields.size() != g_count + 1)
            throw model_error("external model: malformed REQ response");
        info_.n_requirements = g_count;
        return {fields.begin() + 1, fields.end()};
    }

    std::unique_ptr<SimulationModel> fork_worker() const override {
        return std::make_unique<ExternalModel>(argv_, info_.dim_a, info_.dim_e, info_.dim_theta,
                                               timeout_s_);
    }

  private:
    std::vector<std::string> argv_;
    double timeout_s_;
    mutable std::mutex mu_;
    mutable ModelInfo info_{};
    mutable pid_t pid_ = -1;
    mutable int to_child_ = -1, from_child_ = -1;
    mutable std::string buf_;

    template <typename Seq>
    static void append_numbers(std::ostringstream& out, const Seq& xs) {
        char tmp[40];
        for (double x : xs) {
            std::snprintf(tmp, sizeof tmp, " %.17g", x);
            out << tmp;
        }
    }

    void spawn() const {
        int in_pipe[2], out_pipe[2], exec_pipe[2];
        if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0 || pipe2(exec_pipe, O_CLOEXEC) != 0)
            throw model_error("external model: pipe() failed");
        pid_ = fork();
        if (pid_ < 0) throw model_error("external model: fork() failed");
        if (pid_ == 0) {
            dup2(in_pipe[0], STDIN_FILENO);
            dup2(out_pipe[1], STDOUT_FILENO);
            close(in_pipe[0]);
            close(in_pipe[1]);
            close(out_pipe[0]);
            close(out_pipe[1]);
            close(exec_pipe[0]);
            std::vector<char*> argv;
            for (const auto& s : argv_) argv.push_back(const_cast<char*>(s.c_str()));
            argv.push_back(nullptr);
            execvp(argv[0], argv.data());
            const int err = errno; // report exec failure through the CLOEXEC pipe
            ssize_t rc = write(exec_pipe[1], &err, sizeof err);
            (void)rc;
            _exit(127);
        }
        close(in_pipe[0]);
        close(out_pipe[1]);
        close(exec_pipe[1]);
        to_child_ = in_pipe[1];
        from_child_ = out_pipe[0];
        buf_.clear();
        // CLOEXEC closes the write end on a successful exec, so a zero-byte
        // read means the child is running; bytes carry the exec errno
        int exec_errno = 0;
        const ssize_t n = read(exec_pipe[0], &exec_errno, sizeof exec_errno);
        close(exec_pipe[0]);
        if (n > 0) {
            waitpid(pid_, nullptr, 0);
            pid_ = -1;
            close(to_child_);
            close(from_child_);
            to_child_ = from_child_ = -1;
            throw model_error("external model: cannot execute '" + argv_[0] +
                              "': " + std::strerror(exec_errno));
        }
    }

    void shutdown() const {
        if (to_child_ >= 0) close(to_child_);
        if (from_child_ >= 0) close(from_child_);
        to_child_ = from_child_ = -1;
        if (pid_ > 0) {
            // closing stdin asks the child to exit; escalate if it lingers
            for (int tries = 0; tries < 200; ++tries) {
                if (waitpid(pid_, nullptr, WNOHANG) != 0) {
                    pid_ = -1;
                    return;
                }
                usleep(10000);
            }
            kill(pid_, SIGKILL);
            waitpid(pid_, nullptr, 0);
            pid_ = -1;
        }
    }

    void fail(const std::string& why) const {
        shutdown();
        throw model_error("external model: " + why);
    }

    std::vector<double> round_trip(const std::string& request) const {
        if (pid_ < 0) fail("child not running");
        std::string line = request;
        line.push_back('\n');
        // block SIGPIPE for this thread so a dead child surfaces as EPIPE
        // instead of killing the process; consume any pending signal before
        // restoring the mask
        sigset_t pipe_set, old_set;
        sigemptyset(&pipe_set);
        sigaddset(&pipe_set, SIGPIPE);
        pthread_sigmask(SIG_BLOCK, &pipe_set, &old_set);
        bool broken = false;
        std::size_t off = 0;
        while (off < line.size()) {
            const ssize_t w = write(to_child_, line.data() + off, line.size() - off);
            if (w <= 0) {
                broken = true;
                break;
            }
            off += std::size_t(w);
        }
        if (broken) {
            struct timespec zero = {0, 0};
            sigtimedwait(&pipe_set, nullptr, &zero);
        }
        pthread_sigmask(SIG_SETMASK, &old_set, nullptr);
        if (broken) fail("write to child failed (exit or crash?)");
        const std::string resp = read_line();
        if (resp.rfind("ERR", 0) == 0) {
            // evaluation-level failure; child stays usable
            throw model_error("external model reported: " +
                              (resp.size() > 4 ? resp.substr(4) : std::string("(no message)")));
        }
        if (resp.rfind("OK", 0) != 0) fail("protocol violation: expected OK/ERR, got '" + resp + "'");
        std::vector<double> fields;
        const char* s = resp.c_str() + 2;
        char* end = nullptr;
        while (true) {
            const double v = std::strtod(s, &end);
            if (end == s) break;
            if (!std::isfinite(v)) fail("non-finite number in response");
            fields.push_back(v);
            s = end;
        }
        while (*s == ' ' || *s == '\t') ++s;
        if (*s != '\0') fail("trailing garbage in response");
        return fields;
    }

    std::string read_line() const {
        while (true) {
            const auto nl = buf_.find('\n');
            if (nl != std::string::npos) {
                std::string line = buf_.substr(0, nl);
                buf_.erase(0, nl + 1);
                if (!line.empty() && line.back() == '\r') line.pop_back();
                return line;
            }
            struct pollfd pfd {
                from_child_, POLLIN, 0
            };
            const int pr = poll(&pfd, 1, int(timeout_s_ * 1000.0));
            if (pr == 0) fail("timeout waiting for response");
            if (pr < 0) fail("poll failed");
            char chunk[4096];
            const ssize_t r = read(from_child_, chunk, sizeof chunk);
            if (r <= 0) fail("child closed stdout (nonzero exit or crash?)");
            buf_.append(chunk, std::size_t(r));
        }
    }
};

} // namespace uqcal
