import { ServiceClient } from "./api.js";
import { FaderConsole } from "./console.js";
import { blobAudioSink, mountConsole } from "./view.js";

const root = document.getElementById("app");
if (root === null) throw new Error("missing #app mount point");

mountConsole(root, new FaderConsole(new ServiceClient()), blobAudioSink());
