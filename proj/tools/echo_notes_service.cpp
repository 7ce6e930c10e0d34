// echo-notes: the reference vulnerable service for attack/defense matches.
//
// Line protocol over TCP:
//   PING                 -> PONG
//   SET <name> <text>    -> OK        (stores a note)
//   GET <name>           -> note text, then END
//   LIST                 -> one name per line, then END
//
// GET interpolates the note name into a shell command, which is the intended
// command-injection hole ("GET x; cat ../../root/root.txt" walks out of the
// notes directory). Paths are relative to $ADCTF_FS_ROOT so the same binary
// runs inside a container or against a scratch rootfs.

#include <cctype>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

namespace {

std::string g_notes_dir;

std::string sanitize_name(const std::string& name) {
    std::string out;
    for (char c : name)
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-') out += c;
    return out.empty() ? "note" : out;
}

void send_all(int fd, const std::string& data) {
    std::size_t sent = 0;
    while (sent < data.size()) {
        ssize_t n = ::send(fd, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
        if (n <= 0) return;
        sent += static_cast<std::size_t>(n);
    }
}

std::string handle_get(const std::string& name) {
    // Vulnerable on purpose: the name reaches the shell unsanitized.
    std::string cmd = "cd '" + g_notes_dir + "' 2>/dev/null && cat " + name + " 2>/dev/null";
    std::string out;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (pipe) {
        char buf[512];
        while (std::size_t n = fread(buf, 1, sizeof(buf), pipe)) out.append(buf, n);
        pclose(pipe);
    }
    return out;
}

void handle_connection(int fd) {
    std::string buffer;
    char chunk[1024];
    for (;;) {
        auto nl = buffer.find('\n');
        if (nl == std::string::npos) {
            ssize_t n = ::recv(fd, chunk, sizeof(chunk), 0);
            if (n <= 0) return;
            buffer.append(chunk, static_cast<std::size_t>(n));
            continue;
        }
        std::string line = buffer.substr(0, nl);
        buffer.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();

        std::istringstream words(line);
        std::string verb;
        words >> verb;
        if (verb == "PING") {
            send_all(fd, "PONG\n");
        } else if (verb == "SET") {
            std::string name, text;
            words >> name;
            std::getline(words, text);
            if (!text.empty() && text.front() == ' ') text.erase(0, 1);
            std::ofstream out(g_notes_dir + "/" + sanitize_name(name));
            out << text << "\n";
            send_all(fd, out ? "OK\n" : "ERR store failed\n");
        } else if (verb == "GET") {
            std::string rest;
            std::getline(words, rest);
            if (!rest.empty() && rest.front() == ' ') rest.erase(0, 1);
            send_all(fd, handle_get(rest));
            send_all(fd, "END\n");
        } else if (verb == "LIST") {
            std::string names;
            for (const auto& e : std::filesystem::directory_iterator(g_notes_dir))
                names += e.path().filename().string() + "\n";
            send_all(fd, names + "END\n");
        } else if (verb == "QUIT") {
            return;
        } else {
            send_all(fd, "ERR unknown command\n");
        }
    }
}

} // namespace

int main(int argc, char** argv) {
    std::signal(SIGPIPE, SIG_IGN);
    const char* fs_root = std::getenv("ADCTF_FS_ROOT");
    std::string root = fs_root ? fs_root : "";
    g_notes_dir = root + "/var/notes";
    std::filesystem::create_directories(g_notes_dir);

    int port = 4000;
    if (const char* p = std::getenv("ADCTF_PORT")) port = std::atoi(p);
    if (argc > 2 && std::strcmp(argv[1], "--port") == 0) port = std::atoi(argv[2]);
    const char* bind_addr = std::getenv("ADCTF_BIND");

    int listener = ::socket(AF_INET, SOCK_STREAM, 0);
    int yes = 1;
    setsockopt(listener, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<uint16_t>(port));
    addr.sin_addr.s_addr = bind_addr ? inet_addr(bind_addr) : htonl(INADDR_ANY);
    if (::bind(listener, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
        ::listen(listener, 16) != 0) {
        std::perror("echo-notes: bind/listen");
        return 1;
    }
    std::fprintf(stderr, "echo-notes listening on port %d, notes in %s\n", port, g_notes_dir.c_str());

    for (;;) {
        int fd = ::accept(listener, nullptr, nullptr);
        if (fd < 0) continue;
        handle_connection(fd);
        ::close(fd);
    }
}
