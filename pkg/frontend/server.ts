// Static host for the console plus a same-origin reverse proxy onto the
// engine's HTTP/WS surface. The browser talks to one origin; everything
// under /api and /ws is piped to the engine untouched, so the console
// consumes exactly the documented endpoints.

import { readFile } from "node:fs/promises";
import {
  IncomingMessage,
  Server,
  ServerResponse,
  createServer,
  request as httpRequest,
} from "node:http";
import { dirname, extname, join, resolve } from "node:path";
import { fileURLToPath } from "node:url";
import { parseArgs } from "node:util";

import { WebSocket, WebSocketServer } from "ws";

const MIME: Record<string, string> = {
  ".html": "text/html; charset=utf-8",
  ".js": "text/javascript; charset=utf-8",
  ".css": "text/css; charset=utf-8",
  ".json": "application/json",
  ".map": "application/json",
  ".png": "image/png",
  ".svg": "image/svg+xml",
  ".ico": "image/x-icon",
};

export interface ConsoleServerOptions {
  engine: string; // engine base URL, e.g. http://127.0.0.1:8765
  root?: string; // static root; defaults to the package directory
}

function packageRoot(): string {
  // compiled file lives in dist/, sources in the package root
  const here = dirname(fileURLToPath(import.meta.url));
  return here.endsWith("dist") ? resolve(here, "..") : here;
}

async function serveStatic(root: string, url: string, res: ServerResponse): Promise<void> {
  const rel = url === "/" ? "index.html" : url.replace(/^\/+/, "").split("?")[0]!;
  const path = resolve(join(root, rel));
  if (!path.startsWith(resolve(root))) {
    res.writeHead(403).end("forbidden");
    return;
  }
  try {
    const body = await readFile(path);
    res.writeHead(200, { "content-type": MIME[extname(path)] ?? "application/octet-stream" });
    res.end(body);
  } catch {
    res.writeHead(404).end("not found");
  }
}

function proxyHttp(engine: URL, req: IncomingMessage, res: ServerResponse): void {
  const upstream = httpRequest(
    {
      hostname: engine.hostname,
      port: engine.port,
      path: req.url,
      method: req.method,
      headers: { ...req.headers, host: engine.host },
    },
    (answer) => {
      res.writeHead(answer.statusCode ?? 502, answer.headers);
      answer.pipe(res);
    },
  );
  upstream.on("error", () => {
    res.writeHead(502, { "content-type": "application/json" });
    res.end(JSON.stringify({ error: "engine unreachable", kind: "ProxyError" }));
  });
  req.pipe(upstream);
}

export function createConsoleServer(options: ConsoleServerOptions): Server {
  const engine = new URL(options.engine);
  const root = options.root ?? packageRoot();
  const server = createServer((req, res) => {
    const url = req.url ?? "/";
    if (url.startsWith("/api/")) {
      proxyHttp(engine, req, res);
    } else {
      void serveStatic(root, url, res);
    }
  });

  const wss = new WebSocketServer({ noServer: true });
  server.on("upgrade", (req, socket, head) => {
    const url = req.url ?? "";
    if (!url.startsWith("/ws/")) {
      socket.destroy();
      return;
    }
    // dial the engine first and only complete the client's upgrade once
    // the upstream is open; with the engine down the browser then sees a
    // failed connection instead of an open socket that dies instantly
    const upstream = new WebSocket(`ws://${engine.host}${url}`);
    let upgraded = false;
    upstream.on("error", () => {
      if (!upgraded) socket.destroy();
    });
    socket.on("close", () => {
      if (!upgraded) upstream.close();
    });
    upstream.on("open", () => {
      upgraded = true;
      wss.handleUpgrade(req, socket, head, (client) => {
        client.on("message", (data) => {
          if (upstream.readyState === WebSocket.OPEN) upstream.send(data.toString());
        });
        upstream.on("message", (data) => client.send(data.toString()));
        const closeBoth = (): void => {
          client.close();
          upstream.close();
        };
        client.on("close", closeBoth);
        upstream.on("close", closeBoth);
        client.on("error", closeBoth);
        upstream.on("error", closeBoth);
      });
    });
  });
  return server;
}

function main(): void {
  const { values } = parseArgs({
    options: {
      engine: { type: "string", default: "http://127.0.0.1:8765" },
      port: { type: "string", default: "8080" },
    },
  });
  const server = createConsoleServer({ engine: values.engine! });
  server.listen(Number(values.port), () => {
    console.log(`console on http://127.0.0.1:${values.port} -> engine ${values.engine}`);
  });
}

if (process.argv[1] !== undefined && import.meta.url === `file://${process.argv[1]}`) {
  main();
}
