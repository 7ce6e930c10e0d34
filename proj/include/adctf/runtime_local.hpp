#pragma once

#include <cstdlib>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <string>
#include <thread>

#include <arpa/inet.h>
#include <fcntl.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

#include "runtime.hpp"
#include "time.hpp"

namespace adctf {

// Containers as local processes: each "container" is a scratch rootfs
// directory plus, when the image maps to a service binary, a child process
// listening on a loopback port. Gives live end-to-end matches without a
// container daemon.
class LocalProcessRuntime final : public ContainerRuntime {
public:
    explicit LocalProcessRuntime(std::map<std::string, std::string> image_binaries = {},
                                 std::string work_dir = "")
        : image_binaries_(std::move(image_binaries)) {
        if (work_dir.empty()) {
            work_dir = (std::filesystem::temp_directory_path() /
                        ("adctf-local-" + std::to_string(::getpid())))
                           .string();
        }
        work_dir_ = work_dir;
        std::filesystem::create_directories(work_dir_);
    }

    ~LocalProcessRuntime() override {
        for (auto& [id, c] : containers_) kill_process(c);
        std::error_code ec;
        std::filesystem::remove_all(work_dir_, ec);
    }

    bool ping() override { return true; }

    std::string create_network(const std::string& name, const std::string&) override {
        return "local-" + name;
    }
    void remove_network(const std::string&) override {}

    std::string create_container(const ContainerSpec& spec) override {
        std::lock_guard lock(mu_);
        std::string id = "local-" + spec.name;
        auto existing = containers_.find(id);
        if (existing != containers_.end()) {
            kill_process(existing->second);
            containers_.erase(existing);
        }
        Container c;
        c.spec = spec;
        c.rootfs = work_dir_ + "/" + spec.name;
        std::filesystem::remove_all(c.rootfs);
        std::filesystem::create_directories(c.rootfs);
        auto bin = image_binaries_.find(spec.image);
        if (bin != image_binaries_.end()) {
            c.binary = bin->second;
            c.port = pick_free_port();
        }
        containers_[id] = std::move(c);
        return id;
    }

    void start_container(const std::string& id) override {
        std::lock_guard lock(mu_);
        Container& c = container(id);
        if (c.binary.empty() || c.pid > 0) {
            c.running = true;
            return;
        }
        pid_t pid = fork();
        if (pid < 0) throw RuntimeError("fork failed for " + id);
        if (pid == 0) {
            setpgid(0, 0);
            // service output goes to a per-container log, not the caller's tty
            std::string log_path = c.rootfs + "/service.log";
            int log_fd = ::open(log_path.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
            if (log_fd >= 0) {
                dup2(log_fd, STDOUT_FILENO);
                dup2(log_fd, STDERR_FILENO);
                ::close(log_fd);
            }
            setenv("ADCTF_FS_ROOT", c.rootfs.c_str(), 1);
            setenv("ADCTF_PORT", std::to_string(c.port).c_str(), 1);
            setenv("ADCTF_BIND", "127.0.0.1", 1);
            for (const auto& [k, v] : c.spec.env) setenv(k.c_str(), v.c_str(), 1);
            execl(c.binary.c_str(), c.binary.c_str(), static_cast<char*>(nullptr));
            _exit(127);
        }
        c.pid = pid;
        c.running = true;
        if (!wait_listening(c.port, 5 * second_ms))
            throw RuntimeError("service for " + id + " did not come up on port " +
                               std::to_string(c.port));
    }

    void stop_container(const std::string& id) override {
        std::lock_guard lock(mu_);
        auto it = containers_.find(id);
        if (it == containers_.end()) return;
        kill_process(it->second);
        it->second.running = false;
    }

    void remove_container(const std::string& id) override {
        std::lock_guard lock(mu_);
        auto it = containers_.find(id);
        if (it == containers_.end()) return;
        kill_process(it->second);
        std::error_code ec;
        std::filesystem::remove_all(it->second.rootfs, ec);
        containers_.erase(it);
    }

    void write_file(const std::string& id, const std::string& path, const std::string& content,
                    int mode, const std::string&) override {
        std::lock_guard lock(mu_);
        Container& c = container(id);
        if (!c.running) throw RuntimeError("container not running: " + id);
        std::filesystem::path full = c.rootfs + path;
        std::filesystem::create_directories(full.parent_path());
        std::ofstream out(full, std::ios::binary | std::ios::trunc);
        if (!out) throw RuntimeError("cannot write " + full.string());
        out << content;
        out.close();
        ::chmod(full.c_str(), static_cast<mode_t>(mode));
    }

    std::string read_file(const std::string& id, const std::string& path) override {
        std::lock_guard lock(mu_);
        Container& c = container(id);
        std::ifstream in(c.rootfs + path, std::ios::binary);
        if (!in) throw RuntimeError("no such file in " + id + ": " + path);
        std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        return content;
    }

    std::string checker_host(const std::string&) override { return "127.0.0.1"; }

    int checker_port(const std::string& id) override {
        std::lock_guard lock(mu_);
        return container(id).port;
    }

    std::map<std::string, std::string> checker_env(const std::string& id) override {
        std::lock_guard lock(mu_);
        return {{"ADCTF_FS_ROOT", container(id).rootfs}};
    }

    std::string rootfs(const std::string& id) {
        std::lock_guard lock(mu_);
        return container(id).rootfs;
    }

private:
    struct Container {
        ContainerSpec spec;
        std::string rootfs;
        std::string binary;
        int port = 0;
        pid_t pid = -1;
        bool running = false;
    };

    Container& container(const std::string& id) {
        auto it = containers_.find(id);
        if (it == containers_.end()) throw RuntimeError("no such container: " + id);
        return it->second;
    }

    static void kill_process(Container& c) {
        if (c.pid <= 0) return;
        ::kill(-c.pid, SIGKILL);
        ::kill(c.pid, SIGKILL);
        int status = 0;
        waitpid(c.pid, &status, 0);
        c.pid = -1;
    }

    static int pick_free_port() {
        int fd = ::socket(AF_INET, SOCK_STREAM, 0);
        if (fd < 0) throw RuntimeError("socket failed");
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
        addr.sin_port = 0;
        if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
            ::close(fd);
            throw RuntimeError("bind failed");
        }
        socklen_t len = sizeof(addr);
        getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
        int port = ntohs(addr.sin_port);
        ::close(fd);
        return port;
    }

    static bool wait_listening(int port, millis deadline_ms) {
        const auto start = std::chrono::steady_clock::now();
        for (;;) {
            int fd = ::socket(AF_INET, SOCK_STREAM, 0);
            sockaddr_in addr{};
            addr.sin_family = AF_INET;
            addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
            addr.sin_port = htons(static_cast<uint16_t>(port));
            int rc = ::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr));
            ::close(fd);
            if (rc == 0) return true;
            auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                               std::chrono::steady_clock::now() - start)
                               .count();
            if (elapsed > deadline_ms) return false;
            std::this_thread::sleep_for(std::chrono::milliseconds(50));
        }
    }

    std::mutex mu_;
    std::string work_dir_;
    std::map<std::string, std::string> image_binaries_;
    std::map<std::string, Container> containers_;
};

} // namespace adctf
