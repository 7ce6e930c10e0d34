// SLA checker for the echo-notes service. Probes three things in order:
// availability (TCP connect), functionality (PING and a SET/GET round trip),
// and flag integrity (the flag files readable through the provisioned
// filesystem still hold the expected tokens).
//
// Prints exactly one status code on stdout:
//   101 OK, 102 corrupt flags, 103 degraded, 104 unreachable.
// Internal faults exit non-zero and let the engine map them to 110.

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <string>

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

namespace {

int connect_with_timeout(const std::string& host, int port, int timeout_ms) {
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    if (getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res) != 0) return -1;
    int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
    if (fd >= 0) {
        timeval tv{timeout_ms / 1000, (timeout_ms % 1000) * 1000};
        setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
        setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof(tv));
        if (::connect(fd, res->ai_addr, res->ai_addrlen) != 0) {
            ::close(fd);
            fd = -1;
        }
    }
    freeaddrinfo(res);
    return fd;
}

bool send_line(int fd, const std::string& line) {
    std::string msg = line + "\n";
    return ::send(fd, msg.data(), msg.size(), MSG_NOSIGNAL) == static_cast<ssize_t>(msg.size());
}

std::string recv_line(int fd) {
    std::string line;
    char c;
    while (::recv(fd, &c, 1, 0) == 1) {
        if (c == '\n') break;
        line += c;
    }
    return line;
}

// Flag files are read back through the environment the match provisioned;
// a missing or altered token is corruption regardless of service health.
bool flag_intact(const std::string& fs_root, const char* path_var, const char* token_var) {
    const char* path = std::getenv(path_var);
    const char* token = std::getenv(token_var);
    if (!path || !token) return true; // nothing to verify against
    std::ifstream in(fs_root + path);
    if (!in) return false;
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    while (!content.empty() && (content.back() == '\n' || content.back() == '\r')) content.pop_back();
    return content == token;
}

} // namespace

int main(int argc, char** argv) {
    std::string host = "127.0.0.1";
    for (int i = 1; i + 1 < argc; ++i)
        if (std::strcmp(argv[i], "--host") == 0) host = argv[i + 1];
    int port = 4000;
    if (const char* p = std::getenv("ADCTF_SERVICE_PORT")) port = std::atoi(p);

    int fd = connect_with_timeout(host, port, 2000);
    if (fd < 0) {
        std::printf("104\n");
        return 0;
    }

    bool functional = true;
    if (!send_line(fd, "PING") || recv_line(fd) != "PONG") functional = false;
    if (functional) {
        std::string probe = "sla" + std::to_string(::getpid());
        std::string value = "check-" + std::to_string(::getpid() * 7919);
        if (!send_line(fd, "SET " + probe + " " + value) || recv_line(fd) != "OK") functional = false;
        if (functional) {
            if (!send_line(fd, "GET " + probe)) functional = false;
            std::string got = recv_line(fd);
            std::string end = recv_line(fd);
            if (got != value || end != "END") functional = false;
        }
    }
    send_line(fd, "QUIT");
    ::close(fd);

    if (!functional) {
        std::printf("103\n");
        return 0;
    }

    const char* fs = std::getenv("ADCTF_FS_ROOT");
    std::string fs_root = fs ? fs : "";
    if (!flag_intact(fs_root, "ADCTF_USER_FLAG_PATH", "ADCTF_USER_FLAG_TOKEN") ||
        !flag_intact(fs_root, "ADCTF_ROOT_FLAG_PATH", "ADCTF_ROOT_FLAG_TOKEN")) {
        std::printf("102\n");
        return 0;
    }

    std::printf("101\n");
    return 0;
}
