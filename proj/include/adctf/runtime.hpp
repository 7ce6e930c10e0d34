#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace adctf {

struct RuntimeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ContainerSpec {
    std::string name;
    std::string image;
    int team = 0;
    std::string machine;
    std::string ip;
    std::string network; // network id returned by create_network
    std::map<std::string, std::string> env;
};

// Thin client over a container runtime. Only the operations the match needs:
// lifecycle, one network, and file I/O for flag placement and verification.
class ContainerRuntime {
public:
    virtual ~ContainerRuntime() = default;

    virtual bool ping() = 0;
    virtual std::string create_network(const std::string& name, const std::string& subnet) = 0;
    virtual void remove_network(const std::string& id) = 0;

    virtual std::string create_container(const ContainerSpec& spec) = 0;
    virtual void start_container(const std::string& id) = 0;
    virtual void stop_container(const std::string& id) = 0;
    virtual void remove_container(const std::string& id) = 0;

    virtual void write_file(const std::string& container_id, const std::string& path,
                            const std::string& content, int mode, const std::string& owner) = 0;
    virtual std::string read_file(const std::string& container_id, const std::string& path) = 0;

    // Endpoint a checker should probe for this container; empty when the
    // runtime has no live service for it.
    virtual std::string checker_host(const std::string& container_id) = 0;
    virtual int checker_port(const std::string& container_id) = 0;

    // Extra environment the checker needs to reach the container's filesystem,
    // if this runtime exposes one.
    virtual std::map<std::string, std::string> checker_env(const std::string& container_id) = 0;
};

// Fully in-memory runtime for tests: containers are records, files live in a
// map. Failure injection covers the error paths the engine must survive.
class InMemoryRuntime final : public ContainerRuntime {
public:
    struct FileEntry {
        std::string content;
        int mode = 0;
        std::string owner;
    };

    struct Container {
        ContainerSpec spec;
        bool running = false;
        std::map<std::string, FileEntry> files;
    };

    bool ping() override { return !unreachable_; }

    std::string create_network(const std::string& name, const std::string& subnet) override {
        std::lock_guard lock(mu_);
        fail_if_unreachable();
        std::string id = "net-" + name;
        networks_[id] = subnet;
        return id;
    }

    void remove_network(const std::string& id) override {
        std::lock_guard lock(mu_);
        fail_if_unreachable();
        networks_.erase(id); // removing an absent network is fine
    }

    std::string create_container(const ContainerSpec& spec) override {
        std::lock_guard lock(mu_);
        fail_if_unreachable();
        if (fail_create_machines_.count(spec.machine))
            throw RuntimeError("image missing for machine: " + spec.machine);
        std::string id = "ctr-" + spec.name;
        containers_.erase(id); // replace any stale container of the same name
        containers_[id].spec = spec;
        return id;
    }

    void start_container(const std::string& id) override {
        std::lock_guard lock(mu_);
        container(id).running = true;
    }

    void stop_container(const std::string& id) override {
        std::lock_guard lock(mu_);
        fail_if_unreachable();
        auto it = containers_.find(id);
        if (it != containers_.end()) it->second.running = false;
    }

    void remove_container(const std::string& id) override {
        std::lock_guard lock(mu_);
        fail_if_unreachable();
        containers_.erase(id); // idempotent
    }

    void write_file(const std::string& id, const std::string& path, const std::string& content,
                    int mode, const std::string& owner) override {
        std::lock_guard lock(mu_);
        fail_if_unreachable();
        Container& c = container(id);
        if (!c.running || fail_write_machines_.count(c.spec.machine))
            throw RuntimeError("container not reachable for write: " + id);
        c.files[path] = FileEntry{content, mode, owner};
    }

    std::string read_file(const std::string& id, const std::string& path) override {
        std::lock_guard lock(mu_);
        Container& c = container(id);
        auto it = c.files.find(path);
        if (it == c.files.end()) throw RuntimeError("no such file in " + id + ": " + path);
        return it->second.content;
    }

    std::string checker_host(const std::string& id) override {
        std::lock_guard lock(mu_);
        return container(id).spec.ip;
    }

    int checker_port(const std::string&) override { return 0; }

    std::map<std::string, std::string> checker_env(const std::string&) override { return {}; }

    // --- test hooks ---
    void set_unreachable(bool v) { unreachable_ = v; }
    void fail_create_for(const std::string& machine) { fail_create_machines_.insert(machine); }
    void fail_write_for(const std::string& machine) { fail_write_machines_.insert(machine); }

    std::size_t container_count() const {
        std::lock_guard lock(mu_);
        return containers_.size();
    }
    std::size_t network_count() const {
        std::lock_guard lock(mu_);
        return networks_.size();
    }
    std::optional<FileEntry> file(const std::string& id, const std::string& path) const {
        std::lock_guard lock(mu_);
        auto c = containers_.find(id);
        if (c == containers_.end()) return std::nullopt;
        auto f = c->second.files.find(path);
        if (f == c->second.files.end()) return std::nullopt;
        return f->second;
    }
    std::vector<std::string> container_ids() const {
        std::lock_guard lock(mu_);
        std::vector<std::string> ids;
        for (const auto& [id, c] : containers_) ids.push_back(id);
        return ids;
    }
    std::optional<ContainerSpec> container_spec(const std::string& id) const {
        std::lock_guard lock(mu_);
        auto it = containers_.find(id);
        if (it == containers_.end()) return std::nullopt;
        return it->second.spec;
    }

private:
    Container& container(const std::string& id) {
        auto it = containers_.find(id);
        if (it == containers_.end()) throw RuntimeError("no such container: " + id);
        return it->second;
    }
    void fail_if_unreachable() const {
        if (unreachable_) throw RuntimeError("container runtime unreachable");
    }

    mutable std::mutex mu_;
    bool unreachable_ = false;
    std::map<std::string, std::string> networks_;
    std::map<std::string, Container> containers_;
    std::set<std::string> fail_create_machines_;
    std::set<std::string> fail_write_machines_;
};

} // namespace adctf
