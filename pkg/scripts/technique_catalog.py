"""Technique names and short descriptions for the sample dataset generator."""

TECHNIQUES = {
    "T1003": ("OS Credential Dumping", "Adversaries may attempt to dump credentials to obtain account login material, normally in the form of a hash or a cleartext password."),
    "T1005": ("Data from Local System", "Adversaries may search local system sources, such as file systems or local databases, to find files of interest."),
    "T1010": ("Application Window Discovery", "Adversaries may attempt to get a listing of open application windows to learn how the system is used."),
    "T1016": ("System Network Configuration Discovery", "Adversaries may look for details about the network configuration and settings of systems they access."),
    "T1018": ("Remote System Discovery", "Adversaries may attempt to get a listing of other systems by IP address or hostname on a network."),
    "T1021": ("Remote Services", "Adversaries may use valid accounts to log into a service that accepts remote connections and perform actions as the logged-on user."),
    "T1027": ("Obfuscated Files or Information", "Adversaries may attempt to make an executable or file difficult to discover or analyze by encrypting, encoding, or otherwise obfuscating its contents."),
    "T1040": ("Network Sniffing", "Adversaries may passively sniff network traffic to capture information about an environment, including credentials passed in cleartext."),
    "T1041": ("Exfiltration Over C2 Channel", "Adversaries may steal data by exfiltrating it over an existing command and control channel."),
    "T1046": ("Network Service Discovery", "Adversaries may attempt to get a listing of services running on remote hosts and local network infrastructure devices."),
    "T1047": ("Windows Management Instrumentation", "Adversaries may abuse Windows Management Instrumentation to execute malicious commands and payloads."),
    "T1053": ("Scheduled Task/Job", "Adversaries may abuse task scheduling functionality to facilitate initial or recurring execution of malicious code."),
    "T1055": ("Process Injection", "Adversaries may inject code into processes in order to evade process-based defenses as well as possibly elevate privileges."),
    "T1057": ("Process Discovery", "Adversaries may attempt to get information about running processes on a system."),
    "T1059": ("Command and Scripting Interpreter", "Adversaries may abuse command and script interpreters to execute commands, scripts, or binaries."),
    "T1068": ("Exploitation for Privilege Escalation", "Adversaries may exploit software vulnerabilities in an attempt to elevate privileges."),
    "T1070": ("Indicator Removal", "Adversaries may delete or modify artifacts generated within systems to remove evidence of their presence or hinder defenses."),
    "T1078": ("Valid Accounts", "Adversaries may obtain and abuse credentials of existing accounts as a means of gaining access, persistence, or elevated permissions."),
    "T1082": ("System Information Discovery", "An adversary may attempt to get detailed information about the operating system and hardware."),
    "T1083": ("File and Directory Discovery", "Adversaries may enumerate files and directories or search in specific locations for certain information."),
    "T1087": ("Account Discovery", "Adversaries may attempt to get a listing of valid accounts, usernames, or email addresses on a system or within an environment."),
    "T1090": ("Proxy", "Adversaries may use a connection proxy to direct network traffic between systems or act as an intermediary for network communications."),
    "T1091": ("Replication Through Removable Media", "Adversaries may move onto systems by copying malware to removable media and relying on Autorun features or user execution."),
    "T1098": ("Account Manipulation", "Adversaries may manipulate accounts to maintain or elevate access to victim systems, such as modifying credentials or permission groups."),
    "T1105": ("Ingress Tool Transfer", "Adversaries may transfer tools or other files from an external system into a compromised environment."),
    "T1110": ("Brute Force", "Adversaries may use brute force techniques to gain access to accounts when passwords are unknown or when password hashes are obtained."),
    "T1112": ("Modify Registry", "Adversaries may interact with the Windows Registry to hide configuration information, remove information, or aid in persistence and execution."),
    "T1113": ("Screen Capture", "Adversaries may attempt to take screen captures of the desktop to gather information over the course of an operation."),
    "T1133": ("External Remote Services", "Adversaries may leverage external-facing remote services such as VPNs or remote desktop gateways to initially access and persist within a network."),
    "T1135": ("Network Share Discovery", "Adversaries may look for folders and drives shared on remote systems to identify sources of information to gather."),
    "T1136": ("Create Account", "Adversaries may create an account to maintain access to victim systems."),
    "T1140": ("Deobfuscate/Decode Files or Information", "Adversaries may use obfuscated files or information to hide artifacts of an intrusion from analysis, decoding them at runtime."),
    "T1189": ("Drive-by Compromise", "Adversaries may gain access to a system through a user visiting a website over the normal course of browsing."),
    "T1190": ("Exploit Public-Facing Application", "Adversaries may attempt to exploit a weakness in an Internet-facing host or system to initially access a network."),
    "T1195": ("Supply Chain Compromise", "Adversaries may manipulate products or product delivery mechanisms prior to receipt by a final consumer for the purpose of data or system compromise."),
    "T1199": ("Trusted Relationship", "Adversaries may breach or otherwise leverage organizations who have access to intended victims."),
    "T1203": ("Exploitation for Client Execution", "Adversaries may exploit software vulnerabilities in client applications to execute code."),
    "T1204": ("User Execution", "An adversary may rely upon specific actions by a user in order to gain execution."),
    "T1210": ("Exploitation of Remote Services", "Adversaries may exploit remote services to gain unauthorized access to internal systems once inside of a network."),
    "T1211": ("Exploitation for Defense Evasion", "Adversaries may exploit a system or application vulnerability to bypass security features."),
    "T1212": ("Exploitation for Credential Access", "Adversaries may exploit software vulnerabilities in an attempt to collect credentials."),
    "T1218": ("System Binary Proxy Execution", "Adversaries may bypass process and signature-based defenses by proxying execution of malicious content with signed binaries."),
    "T1219": ("Remote Access Software", "An adversary may use legitimate desktop support and remote access software to establish an interactive command and control channel."),
    "T1222": ("File and Directory Permissions Modification", "Adversaries may modify file or directory permissions to evade access control lists or enable modification of protected files."),
    "T1485": ("Data Destruction", "Adversaries may destroy data and files on specific systems or in large numbers on a network to interrupt availability."),
    "T1486": ("Data Encrypted for Impact", "Adversaries may encrypt data on target systems or on large numbers of systems in a network to interrupt availability."),
    "T1489": ("Service Stop", "Adversaries may stop or disable services on a system to render those services unavailable to legitimate users."),
    "T1490": ("Inhibit System Recovery", "Adversaries may delete or remove built-in data and turn off services designed to aid in the recovery of a corrupted system."),
    "T1496": ("Resource Hijacking", "Adversaries may leverage the resources of co-opted systems to complete resource-intensive tasks, which may impact system availability."),
    "T1499": ("Endpoint Denial of Service", "Adversaries may perform endpoint denial of service attacks to degrade or block the availability of services to users."),
    "T1505": ("Server Software Component", "Adversaries may abuse legitimate extensible development features of servers, such as web shells, to establish persistent access to systems."),
    "T1529": ("System Shutdown/Reboot", "Adversaries may shutdown or reboot systems to interrupt access to, or aid in the destruction of, those systems."),
    "T1552": ("Unsecured Credentials", "Adversaries may search compromised systems to find and obtain insecurely stored credentials."),
    "T1554": ("Compromise Host Software Binary", "Adversaries may modify host software binaries to establish persistent access to systems."),
    "T1557": ("Adversary-in-the-Middle", "Adversaries may attempt to position themselves between two or more networked devices to support follow-on behaviors."),
    "T1560": ("Archive Collected Data", "An adversary may compress and/or encrypt data that is collected prior to exfiltration."),
    "T1565": ("Data Manipulation", "Adversaries may insert, delete, or manipulate data in order to influence external outcomes or hide activity."),
    "T1566": ("Phishing", "Adversaries may send phishing messages to gain access to victim systems."),
    "T1573": ("Encrypted Channel", "Adversaries may employ a known encryption algorithm to conceal command and control traffic."),
    "T1574": ("Hijack Execution Flow", "Adversaries may execute their own malicious payloads by hijacking the way operating systems run programs."),
}

SUBTECHNIQUES = {
    "T1021.001": ("Remote Desktop Protocol", "Adversaries may use valid accounts to log into a computer using the Remote Desktop Protocol."),
    "T1059.001": ("PowerShell", "Adversaries may abuse PowerShell commands and scripts for execution."),
    "T1566.001": ("Spearphishing Attachment", "Adversaries may send spearphishing emails with a malicious attachment to gain access to victim systems."),
}

REVOKED = {
    "T1175": ("Component Object Model and Distributed COM", ""),
}
