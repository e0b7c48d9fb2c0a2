import { Client } from "./api.js";
import { Console } from "./console.js";

const client = new Client("");
const console_ = new Console(
  client,
  document.getElementById("answer")!,
  document.getElementById("inspection")!,
  document.getElementById("history")!,
  document.getElementById("status")!,
);

const form = document.getElementById("ask") as HTMLFormElement;
const input = document.getElementById("question") as HTMLInputElement;
form.addEventListener("submit", (event) => {
  event.preventDefault();
  void console_.submit(input.value);
});

client.models().then((body) => {
  const model = body.models[0];
  const el = document.getElementById("model-name")!;
  el.textContent = model ? model.name : "no model";
}).catch(() => {
  document.getElementById("model-name")!.textContent = "service unreachable";
});
