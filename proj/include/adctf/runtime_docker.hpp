#pragma once

#include <cstring>
#include <map>
#include <string>

#include <sys/socket.h>

#include <httplib.h>
#include <json.hpp>

#include "runtime.hpp"

namespace adctf {

namespace tarball {

// Single-file ustar archive, enough for the engine's file placement API.
inline std::string pack_one(const std::string& path, const std::string& content, int mode) {
    std::string name = path;
    while (!name.empty() && name.front() == '/') name.erase(0, 1);
    char header[512];
    std::memset(header, 0, sizeof(header));
    std::snprintf(header + 0, 100, "%s", name.c_str());
    std::snprintf(header + 100, 8, "%07o", mode & 07777);
    std::snprintf(header + 108, 8, "%07o", 0); // uid root
    std::snprintf(header + 116, 8, "%07o", 0); // gid root
    std::snprintf(header + 124, 12, "%011lo", static_cast<unsigned long>(content.size()));
    std::snprintf(header + 136, 12, "%011o", 0);
    header[156] = '0'; // regular file
    std::memcpy(header + 257, "ustar", 5);
    header[263] = '0';
    header[264] = '0';
    std::memset(header + 148, ' ', 8);
    unsigned checksum = 0;
    for (unsigned char c : header) checksum += c;
    std::snprintf(header + 148, 8, "%06o", checksum);
    header[155] = ' ';

    std::string out(header, sizeof(header));
    out += content;
    if (out.size() % 512) out.append(512 - out.size() % 512, '\0');
    out.append(1024, '\0'); // end-of-archive
    return out;
}

// First regular file's content out of an ustar stream.
inline std::string unpack_first(const std::string& tar) {
    std::size_t off = 0;
    while (off + 512 <= tar.size()) {
        const char* h = tar.data() + off;
        if (h[0] == '\0') break;
        unsigned long size = std::strtoul(std::string(h + 124, 12).c_str(), nullptr, 8);
        char type = h[156];
        off += 512;
        if (type == '0' || type == '\0') return tar.substr(off, size);
        off += (size + 511) / 512 * 512;
    }
    throw RuntimeError("archive contained no regular file");
}

} // namespace tarball

// Client for the Docker Engine HTTP API over its unix socket. Every handle the
// engine touches goes through the same narrow ContainerRuntime surface the
// in-memory fake implements.
class DockerRuntime final : public ContainerRuntime {
public:
    explicit DockerRuntime(std::string socket_path = "/var/run/docker.sock",
                           std::string api_version = "v1.41")
        : socket_path_(std::move(socket_path)), prefix_("/" + api_version) {}

    bool ping() override {
        auto cli = client();
        auto res = cli->Get(prefix_ + "/_ping");
        return res && res->status == 200;
    }

    std::string create_network(const std::string& name, const std::string& subnet) override {
        nlohmann::json config = nlohmann::json::array();
        config.push_back({{"Subnet", subnet}});
        nlohmann::json body{{"Name", name},
                            {"Driver", "bridge"},
                            {"IPAM", {{"Config", std::move(config)}}}};
        auto res = post_json("/networks/create", body);
        return res.at("Id").get<std::string>();
    }

    void remove_network(const std::string& id) override {
        auto cli = client();
        auto res = cli->Delete(prefix_ + "/networks/" + id);
        if (!res || (res->status != 204 && res->status != 404))
            throw RuntimeError("docker: remove network failed: " + status_of(res));
    }

    std::string create_container(const ContainerSpec& spec) override {
        nlohmann::json env = nlohmann::json::array();
        for (const auto& [k, v] : spec.env) env.push_back(k + "=" + v);
        nlohmann::json endpoints = nlohmann::json::object();
        endpoints[spec.network] = {{"IPAMConfig", {{"IPv4Address", spec.ip}}}};
        nlohmann::json body{{"Image", spec.image},
                            {"Env", std::move(env)},
                            {"NetworkingConfig", {{"EndpointsConfig", std::move(endpoints)}}}};
        auto res = client()->Post(prefix_ + "/containers/create?name=" + spec.name, body.dump(),
                                  "application/json");
        if (res && res->status == 409) {
            // stale container from an interrupted match; replace it
            remove_container(spec.name);
            res = client()->Post(prefix_ + "/containers/create?name=" + spec.name, body.dump(),
                                 "application/json");
        }
        if (!res || res->status >= 300)
            throw RuntimeError("docker: create container failed: " + status_of(res));
        return nlohmann::json::parse(res->body).at("Id").get<std::string>();
    }

    void start_container(const std::string& id) override {
        expect_ok(client()->Post(prefix_ + "/containers/" + id + "/start", "", "text/plain"),
                  "start container", {204, 304});
    }

    void stop_container(const std::string& id) override {
        expect_ok(client()->Post(prefix_ + "/containers/" + id + "/stop?t=2", "", "text/plain"),
                  "stop container", {204, 304, 404});
    }

    void remove_container(const std::string& id) override {
        expect_ok(client()->Delete(prefix_ + "/containers/" + id + "?force=true"),
                  "remove container", {204, 404});
    }

    void write_file(const std::string& id, const std::string& path, const std::string& content,
                    int mode, const std::string&) override {
        std::string tar = tarball::pack_one(path, content, mode);
        auto res = client()->Put(prefix_ + "/containers/" + id + "/archive?path=/", tar,
                                 "application/x-tar");
        if (!res || res->status != 200)
            throw RuntimeError("docker: write file failed: " + status_of(res));
    }

    std::string read_file(const std::string& id, const std::string& path) override {
        auto res = client()->Get(prefix_ + "/containers/" + id + "/archive?path=" + path);
        if (!res || res->status != 200)
            throw RuntimeError("docker: read file failed: " + status_of(res));
        return tarball::unpack_first(res->body);
    }

    std::string checker_host(const std::string& id) override {
        auto res = client()->Get(prefix_ + "/containers/" + id + "/json");
        if (!res || res->status != 200)
            throw RuntimeError("docker: inspect failed: " + status_of(res));
        auto j = nlohmann::json::parse(res->body);
        for (const auto& [name, net] : j.at("NetworkSettings").at("Networks").items()) {
            auto ip = net.value("IPAddress", "");
            if (!ip.empty()) return ip;
        }
        throw RuntimeError("docker: container has no address: " + id);
    }

    int checker_port(const std::string&) override { return 0; }

    std::map<std::string, std::string> checker_env(const std::string&) override { return {}; }

private:
    std::unique_ptr<httplib::Client> client() {
        auto cli = std::make_unique<httplib::Client>(socket_path_);
        cli->set_address_family(AF_UNIX);
        cli->set_connection_timeout(5);
        cli->set_read_timeout(60);
        return cli;
    }

    static std::string status_of(const httplib::Result& res) {
        if (!res) return "no response";
        return std::to_string(res->status) + " " + res->body;
    }

    static void expect_ok(httplib::Result res, const std::string& what,
                          std::initializer_list<int> ok) {
        if (res)
            for (int code : ok)
                if (res->status == code) return;
        throw RuntimeError("docker: " + what + " failed: " + status_of(res));
    }

    nlohmann::json post_json(const std::string& path, const nlohmann::json& body) {
        auto res = client()->Post(prefix_ + path, body.dump(), "application/json");
        if (!res || res->status >= 300)
            throw RuntimeError("docker: POST " + path + " failed: " + status_of(res));
        return res->body.empty() ? nlohmann::json::object() : nlohmann::json::parse(res->body);
    }

    std::string socket_path_;
    std::string prefix_;
};

} // namespace adctf
